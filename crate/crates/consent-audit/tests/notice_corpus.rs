//! Labeled-corpus agreement suite for the notice pattern engine, checked
//! two ways: frozen hand labels over 200+ strings, and a character-level
//! scanning oracle that shares no code with the regex path.

use consent_audit::model::MatchCategory;
use consent_audit::notice::{builtin_pattern_sources, default_pattern_set, scan_text, PatternSet};

/// (text, copyright_general, copyright_symbol, creative_commons)
type Labeled = (&'static str, bool, bool, bool);

const HAND_LABELED: &[Labeled] = &[
    // copyright symbol
    ("© John Doe 2025", false, true, false),
    ("photo © studio", false, true, false),
    ("©2019 Gallery Nine", false, true, false),
    ("Image &copy; Ana Lima", false, true, false),
    ("&COPY; 2001", false, true, false),
    ("(c) 2020", false, true, false),
    ("(C)2020", false, true, false),
    ("filmed in 2020 (c)", false, true, false),
    ("снимок © автора", false, true, false),
    ("café © 2022", false, true, false),
    ("©", false, true, false),
    ("1999(c)", false, true, false),
    ("(c) 1987 and (c) 1991", false, true, false),
    ("watermark &copy;studio", false, true, false),
    ("banner 2024\t(c) small print", false, true, false),
    // copyright general
    ("Copyright 2019 Acme", true, false, false),
    ("Copyright Acme Studios", true, false, false),
    ("COPYRIGHT 2000", true, false, false),
    ("copr. 1999", true, false, false),
    ("Copr. MCMXCIX", true, false, false),
    ("All Rights Reserved", true, false, false),
    ("all rights reserved.", true, false, false),
    ("Copyright: 2024 Blue Fern Media", true, false, false),
    ("copyright y2024 Name", true, false, false),
    ("ALL RIGHTS RESERVED", true, false, false),
    ("Copyright 2019-2024 Vale Press", true, false, false),
    ("copr.2001", true, false, false),
    ("see copyright Notice fine print", true, false, false),
    ("CopyRight 2020", true, false, false),
    ("poster, copr. Bern", true, false, false),
    // creative commons
    ("Creative Commons license", false, false, true),
    ("licensed CC BY-NC 4.0", false, false, true),
    ("cc by-sa 3.0", false, false, true),
    ("CC-BY-NC-ND 1.0", false, false, true),
    ("shared under CC0", false, false, true),
    ("CC BY", false, false, true),
    ("creative commons attribution", false, false, true),
    ("CC BY-NC-SA 2.0 badge", false, false, true),
    ("cc-by 4.0", false, false, true),
    ("the creative commons org", false, false, true),
    ("CC BY-ND 3.0", false, false, true),
    ("CC BY-SA", false, false, true),
    // the fixed set accepts "CC0" with a trailing non-word char
    ("buy cc0.5 tokens", false, false, true),
    // mixed categories
    ("copyright © 2025", true, true, false),
    ("Copyright © 2020 Creative Commons", true, true, true),
    ("© 1999, all rights reserved", true, true, false),
    ("copr. 2003 CC BY 2.0", true, false, true),
    ("© & copr. dual", true, true, false),
    ("all rights reserved — CC BY 1.0", true, false, true),
    // negatives and near-misses
    ("copper wire copra", false, false, false),
    ("the copyrights debate", false, false, false),
    ("rights reserved", false, false, false),
    ("(c) in the list", false, false, false),
    ("item (c) notes 123", false, false, false),
    ("year 20205 (c)", false, false, false),
    ("creativecommons.org/licenses/by-nc/4.0", false, false, false),
    ("BY-NC 4.0", false, false, false),
    ("ACC BY 2.0", false, false, false),
    ("CC0RE", false, false, false),
    ("copyright", false, false, false),
    ("copyright soon", false, false, false),
    ("Copyright     ", false, false, false),
    ("copyright 123 456", false, false, false),
    ("the accomplice copied the plan", false, false, false),
    ("2020 vision", false, false, false),
    ("copyrighted material, 2020", false, false, false),
    ("Kopyright Killers 1999", false, false, false),
    ("xn--copy; entity", false, false, false),
    ("AT&T copy; 2020", false, false, false),
    ("20 20 (c)", false, false, false),
    ("(c) year unknown", false, false, false),
    ("c) 2020", false, false, false),
    ("( c ) 2020", false, false, false),
    ("CCBY 4.0", false, false, false),
    ("ccc by 2.0", false, false, false),
    ("All rights are reserved", false, false, false),
    ("Allrightsreserved", false, false, false),
    ("copy rights reserved all", false, false, false),
    ("2020cc by", false, false, false),
    ("§ 2020 legal code", false, false, false),
    ("copyright\nAcme 2020", false, false, false),
    ("Copyright\n2020 Acme", false, false, false),
    ("<html>404 Not Found</html>", false, false, false),
    ("User-agent: GPTBot Disallow: /", false, false, false),
    ("https://example.com/img/2020/05/photo.jpg", false, false, false),
    ("DSC_2020.JPG", false, false, false),
    ("wall art print, floral, 24x36", false, false, false),
    ("", false, false, false),
    ("   \t  ", false, false, false),
    // second wave: casing, languages, and more near-misses
    ("Copyright-Free Images", true, false, false),
    ("copyright-free images", false, false, false),
    ("el copyright pertenece a Marta", true, false, false),
    ("ALL RIGHTS RESERVED 2024 (C)", true, true, false),
    ("solo (c)2001", false, true, false),
    ("2020(C) studio", false, true, false),
    ("obra © colección", false, true, false),
    ("imagem &Copy; acervo", false, true, false),
    ("画像 © 2020年", false, true, false),
    ("CC BY 4.0 International", false, false, true),
    ("CC-BY-SA-4.0", false, false, true),
    ("no copyright intended lol", false, false, false),
    ("Copr", false, false, false),
    ("copr, 1999", false, false, false),
    ("reservados todos los derechos", false, false, false),
    ("stock photo, royalty free", false, false, false),
    ("signed print 12/50", false, false, false),
    ("version 2.0 release notes", false, false, false),
    ("watermarked preview image", false, false, false),
    ("公有领域作品", false, false, false),
];

/// Snippets with a single known category, composed into templates below.
const PLANTED: &[(&str, MatchCategory)] = &[
    ("© 2024", MatchCategory::CopyrightSymbol),
    ("copr. 2010", MatchCategory::CopyrightGeneral),
    ("All rights reserved", MatchCategory::CopyrightGeneral),
    ("CC BY 2.0", MatchCategory::CreativeCommons),
    ("&copy; Museum", MatchCategory::CopyrightSymbol),
    ("Copyright 2001 Ames", MatchCategory::CopyrightGeneral),
    ("(c) 1999", MatchCategory::CopyrightSymbol),
    ("creative commons", MatchCategory::CreativeCommons),
    ("CC0", MatchCategory::CreativeCommons),
    ("Copyright Tanaka Lab", MatchCategory::CopyrightGeneral),
];

const TEMPLATES: &[&str] = &["photo of a dog {}", "{} high resolution", "banner {} footer", "{}", "image: {}"];

const CLEAN: &[&str] = &[
    "sunset over the harbor",
    "copper kettle on a stove",
    "hand drawn map of the old town",
    "fresh copra drying in the sun",
    "a bicycle by the canal",
    "two cats sleeping on a rug",
    "abstract painting in blue",
    "street food stall at night",
    "mountain trail after rain",
    "vintage car on a country road",
];

const CLEAN_SUFFIXES: &[&str] = &["", " in color", " at dusk", " photograph", " detail view"];

fn corpus() -> Vec<(String, [bool; 3])> {
    let mut out: Vec<(String, [bool; 3])> = HAND_LABELED
        .iter()
        .map(|(t, g, s, c)| (t.to_string(), [*g, *s, *c]))
        .collect();
    for (snippet, category) in PLANTED {
        for template in TEMPLATES {
            let text = template.replace("{}", snippet);
            let mut label = [false; 3];
            match category {
                MatchCategory::CopyrightGeneral => label[0] = true,
                MatchCategory::CopyrightSymbol => label[1] = true,
                MatchCategory::CreativeCommons => label[2] = true,
                MatchCategory::ExifCopyrightTag => unreachable!(),
            }
            out.push((text, label));
        }
    }
    for clean in CLEAN {
        for suffix in CLEAN_SUFFIXES {
            out.push((format!("{clean}{suffix}"), [false; 3]));
        }
    }
    out
}

fn scan_labels(text: &str, set: &PatternSet) -> [bool; 3] {
    let mut label = [false; 3];
    for m in scan_text(text, set) {
        match m.category {
            MatchCategory::CopyrightGeneral => label[0] = true,
            MatchCategory::CopyrightSymbol => label[1] = true,
            MatchCategory::CreativeCommons => label[2] = true,
            MatchCategory::ExifCopyrightTag => {}
        }
    }
    label
}

// ---------------------------------------------------------------------
// Character-level oracle: independent scanning logic, no regular
// expressions. Mirrors the documented semantics of the builtin set.
// ---------------------------------------------------------------------
mod oracle {
    fn is_word(c: char) -> bool {
        c.is_alphanumeric() || c == '_'
    }

    fn boundary_before(chars: &[char], i: usize) -> bool {
        i == 0 || !is_word(chars[i - 1])
    }

    fn boundary_after(chars: &[char], end: usize) -> bool {
        end >= chars.len() || !is_word(chars[end])
    }

    fn ci_at(chars: &[char], i: usize, lit: &str) -> bool {
        let lit: Vec<char> = lit.chars().collect();
        if i + lit.len() > chars.len() {
            return false;
        }
        chars[i..i + lit.len()]
            .iter()
            .zip(&lit)
            .all(|(a, b)| a.to_lowercase().eq(b.to_lowercase()))
    }

    fn digit_run4(chars: &[char], i: usize) -> bool {
        i + 4 <= chars.len() && chars[i..i + 4].iter().all(|c| c.is_ascii_digit())
    }

    pub fn copyright_general(chars: &[char]) -> bool {
        let n = chars.len();
        for i in 0..n {
            // "copyright" as a word, then a year or capitalized token
            // within the next 40 non-newline characters
            if ci_at(chars, i, "copyright")
                && boundary_before(chars, i)
                && boundary_after(chars, i + 9)
            {
                let start = i + 9;
                for g in 0..=40usize {
                    let pos = start + g;
                    if pos > n {
                        break;
                    }
                    if chars[start..pos].iter().any(|&c| c == '\n' || c == '\r') {
                        break;
                    }
                    if digit_run4(chars, pos)
                        && boundary_before(chars, pos)
                        && boundary_after(chars, pos + 4)
                    {
                        return true;
                    }
                    if pos + 1 < n && chars[pos].is_uppercase() && chars[pos + 1].is_alphabetic() {
                        return true;
                    }
                }
            }
            if ci_at(chars, i, "copr.") && boundary_before(chars, i) {
                return true;
            }
            if ci_at(chars, i, "all rights reserved")
                && boundary_before(chars, i)
                && boundary_after(chars, i + 19)
            {
                return true;
            }
        }
        false
    }

    pub fn copyright_symbol(chars: &[char]) -> bool {
        let n = chars.len();
        for i in 0..n {
            if chars[i] == '©' {
                return true;
            }
            if ci_at(chars, i, "&copy;") {
                return true;
            }
            if ci_at(chars, i, "(c)") {
                // "(c)" then up to three spaces/tabs then a year
                for skip in 0..=3usize {
                    let pos = i + 3 + skip;
                    if chars[i + 3..(i + 3 + skip).min(n)]
                        .iter()
                        .any(|&c| c != ' ' && c != '\t')
                    {
                        break;
                    }
                    if digit_run4(chars, pos) && boundary_after(chars, pos + 4) {
                        return true;
                    }
                }
            }
            // a year then up to three spaces/tabs then "(c)"
            if digit_run4(chars, i) && boundary_before(chars, i) {
                for skip in 0..=3usize {
                    let pos = i + 4 + skip;
                    if chars[i + 4..(i + 4 + skip).min(n)]
                        .iter()
                        .any(|&c| c != ' ' && c != '\t')
                    {
                        break;
                    }
                    if ci_at(chars, pos, "(c)") {
                        return true;
                    }
                }
            }
        }
        false
    }

    pub fn creative_commons(chars: &[char]) -> bool {
        let n = chars.len();
        for i in 0..n {
            if ci_at(chars, i, "creative commons")
                && boundary_before(chars, i)
                && boundary_after(chars, i + 16)
            {
                return true;
            }
            if ci_at(chars, i, "cc")
                && boundary_before(chars, i)
                && i + 2 < n
                && (chars[i + 2] == '-' || chars[i + 2] == ' ')
                && ci_at(chars, i + 3, "by")
                && boundary_after(chars, i + 5)
            {
                return true;
            }
            if ci_at(chars, i, "cc0") && boundary_before(chars, i) && boundary_after(chars, i + 3)
            {
                return true;
            }
        }
        false
    }
}

fn oracle_labels(text: &str) -> [bool; 3] {
    use unicode_normalization::UnicodeNormalization;
    let chars: Vec<char> = text.nfc().collect();
    [
        oracle::copyright_general(&chars),
        oracle::copyright_symbol(&chars),
        oracle::creative_commons(&chars),
    ]
}

#[test]
fn corpus_has_at_least_two_hundred_strings() {
    assert!(corpus().len() >= 200, "corpus size {}", corpus().len());
}

#[test]
fn scanner_agrees_with_every_frozen_label() {
    let set = default_pattern_set();
    let mut failures = Vec::new();
    for (text, expected) in corpus() {
        let got = scan_labels(&text, set);
        if got != expected {
            failures.push(format!("{text:?}: expected {expected:?}, got {got:?}"));
        }
    }
    assert!(
        failures.is_empty(),
        "{} disagreements:\n{}",
        failures.len(),
        failures.join("\n")
    );
}

#[test]
fn scanner_agrees_with_character_oracle_on_the_corpus() {
    let set = default_pattern_set();
    for (text, _) in corpus() {
        assert_eq!(
            scan_labels(&text, set),
            oracle_labels(&text),
            "oracle disagreement on {text:?}"
        );
    }
}

#[test]
fn scanner_agrees_with_character_oracle_on_synthetic_strings() {
    // Word soup drawn from pattern fragments; exercises boundary handling
    // far beyond the hand corpus.
    const WORDS: &[&str] = &[
        "copyright", "Copyright", "copr.", "copra", "copper", "(c)", "(C)", "c", "©", "&copy;",
        "cc", "CC", "by", "BY", "by-nc", "BY-SA", "cc0", "CC0", "2020", "1999", "20205", "123",
        "all", "rights", "reserved", "Acme", "studio", "the", "and", "4.0", "1.0", "-",
        "creative", "commons", "Creative", "Commons",
    ];
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let set = default_pattern_set();
    for _ in 0..1000 {
        let len = rng.gen_range(0..12);
        let mut text = String::new();
        for k in 0..len {
            if k > 0 {
                text.push(if rng.gen_bool(0.85) { ' ' } else { '-' });
            }
            text.push_str(WORDS[rng.gen_range(0..WORDS.len())]);
        }
        assert_eq!(
            scan_labels(&text, set),
            oracle_labels(&text),
            "oracle disagreement on {text:?}"
        );
    }
}

#[test]
fn monotonicity_extra_patterns_only_add_matches() {
    let base_sources = builtin_pattern_sources();
    let mut extended = base_sources.clone();
    extended[2].1.push(r"(?i)\bpublic domain\b".to_string());
    extended[0].1.push(r"(?i)\btrademark\b".to_string());
    let base = PatternSet::compile(&base_sources, false).unwrap();
    let ext = PatternSet::compile(&extended, false).unwrap();
    for (text, _) in corpus() {
        let a = scan_text(&text, &base);
        let b = scan_text(&text, &ext);
        for m in &a {
            assert!(b.contains(m), "lost match {m:?} on {text:?}");
        }
        assert!(b.len() >= a.len());
    }
}

#[test]
fn scanning_is_deterministic_and_order_independent() {
    let set = default_pattern_set();
    let texts: Vec<String> = corpus().into_iter().map(|(t, _)| t).collect();
    let forward: Vec<_> = texts.iter().map(|t| scan_text(t, set)).collect();
    let mut backward: Vec<_> = texts.iter().rev().map(|t| scan_text(t, set)).collect();
    backward.reverse();
    assert_eq!(forward, backward);
    let again: Vec<_> = texts.iter().map(|t| scan_text(t, set)).collect();
    assert_eq!(forward, again);
}
