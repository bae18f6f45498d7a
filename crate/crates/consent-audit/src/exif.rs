//! Copyright extraction from image metadata: the decoded key-value channel
//! and a raw binary parser for the EXIF copyright tag (0x8298, IFD0).
//!
//! The binary parser accepts JPEG streams (APP1/Exif segment) and bare TIFF
//! streams in either byte order. It never reads outside the supplied buffer
//! and never panics on arbitrary input; structural violations are reported
//! as errors.

use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ExifError {
    /// A declared length or offset points past the available bytes.
    #[error("declared segment length exceeds available bytes")]
    TruncatedSegment,
    /// The IFD entry count is inconsistent with the segment size.
    #[error("ifd entry count inconsistent with segment size")]
    MalformedIfd,
}

/// A decoded copyright value. EXIF allows photographer and editor
/// copyrights concatenated with an interior NUL; `text` is the part before
/// the first NUL and `trailing` preserves the remainder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExifCopyright {
    pub text: String,
    pub trailing: Option<String>,
}

/// Returns the copyright claim from a decoded metadata map: the value under
/// the key `Copyright` (case-sensitive) or `0x8298` (case-insensitive),
/// when that value is non-empty and not all whitespace.
pub fn copyright_from_map(metadata: &BTreeMap<String, String>) -> Option<String> {
    let value = metadata.get("Copyright").or_else(|| {
        metadata
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case("0x8298"))
            .map(|(_, v)| v)
    })?;
    if value.trim().is_empty() {
        None
    } else {
        Some(value.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ByteOrder {
    Little,
    Big,
}

fn read_u16(data: &[u8], pos: usize, order: ByteOrder) -> Result<u16, ExifError> {
    let b = data
        .get(pos..pos + 2)
        .ok_or(ExifError::TruncatedSegment)?;
    Ok(match order {
        ByteOrder::Little => u16::from_le_bytes([b[0], b[1]]),
        ByteOrder::Big => u16::from_be_bytes([b[0], b[1]]),
    })
}

fn read_u32(data: &[u8], pos: usize, order: ByteOrder) -> Result<u32, ExifError> {
    let b = data
        .get(pos..pos + 4)
        .ok_or(ExifError::TruncatedSegment)?;
    Ok(match order {
        ByteOrder::Little => u32::from_le_bytes([b[0], b[1], b[2], b[3]]),
        ByteOrder::Big => u32::from_be_bytes([b[0], b[1], b[2], b[3]]),
    })
}

/// Extracts the copyright tag from raw JPEG or TIFF bytes.
///
/// Returns `Ok(None)` when the stream carries no EXIF data, no copyright
/// tag, or a tag whose value is empty after trimming NULs and whitespace.
pub fn parse_exif_copyright(bytes: &[u8]) -> Result<Option<ExifCopyright>, ExifError> {
    if bytes.starts_with(&[0xFF, 0xD8]) {
        return parse_jpeg(bytes);
    }
    if tiff_byte_order(bytes).is_some() {
        return parse_tiff(bytes);
    }
    Ok(None)
}

fn tiff_byte_order(bytes: &[u8]) -> Option<ByteOrder> {
    match bytes.get(..4)? {
        [0x49, 0x49, 0x2A, 0x00] => Some(ByteOrder::Little),
        [0x4D, 0x4D, 0x00, 0x2A] => Some(ByteOrder::Big),
        _ => None,
    }
}

fn parse_jpeg(bytes: &[u8]) -> Result<Option<ExifCopyright>, ExifError> {
    let mut pos = 2usize;
    loop {
        let Some(&lead) = bytes.get(pos) else {
            return Ok(None); // ran out of markers without finding APP1
        };
        if lead != 0xFF {
            return Ok(None); // not a marker stream from here on
        }
        let Some(&marker) = bytes.get(pos + 1) else {
            return Ok(None);
        };
        match marker {
            0xFF => {
                pos += 1; // fill byte
                continue;
            }
            0xD8 | 0x01 | 0xD0..=0xD7 => {
                pos += 2; // standalone markers carry no length
                continue;
            }
            0xD9 | 0xDA => return Ok(None), // EOI / SOS: no APP1 ahead of image data
            _ => {}
        }
        let seg_len = read_u16(bytes, pos + 2, ByteOrder::Big)? as usize;
        if seg_len < 2 {
            return Err(ExifError::TruncatedSegment);
        }
        let seg_end = pos + 2 + seg_len;
        if seg_end > bytes.len() {
            return Err(ExifError::TruncatedSegment);
        }
        if marker == 0xE1 {
            let payload = &bytes[pos + 4..seg_end];
            if let Some(tiff) = payload.strip_prefix(b"Exif\0\0") {
                return parse_tiff(tiff);
            }
        }
        pos = seg_end;
    }
}

fn parse_tiff(data: &[u8]) -> Result<Option<ExifCopyright>, ExifError> {
    let Some(order) = tiff_byte_order(data) else {
        return Ok(None);
    };
    let ifd_offset = read_u32(data, 4, order)? as usize;
    let entry_count = read_u16(data, ifd_offset, order)? as usize;
    let entries_end = ifd_offset
        .checked_add(2 + entry_count * 12)
        .ok_or(ExifError::MalformedIfd)?;
    if entries_end > data.len() {
        return Err(ExifError::MalformedIfd);
    }
    // Copyright (0x8298) lives in IFD0 per the EXIF layout; sub-IFDs are
    // deliberately not walked.
    for i in 0..entry_count {
        let base = ifd_offset + 2 + i * 12;
        let tag = read_u16(data, base, order)?;
        let typ = read_u16(data, base + 2, order)?;
        if tag != 0x8298 || typ != 2 {
            continue;
        }
        let count = read_u32(data, base + 4, order)? as usize;
        if count == 0 {
            return Ok(None);
        }
        let value: &[u8] = if count <= 4 {
            &data[base + 8..base + 8 + count]
        } else {
            let offset = read_u32(data, base + 8, order)? as usize;
            let end = offset.checked_add(count).ok_or(ExifError::TruncatedSegment)?;
            data.get(offset..end).ok_or(ExifError::TruncatedSegment)?
        };
        return Ok(decode_copyright_value(value));
    }
    Ok(None)
}

/// Strips trailing NULs, splits at the first interior NUL, and decodes
/// permissively (ill-formed bytes become replacement characters).
fn decode_copyright_value(value: &[u8]) -> Option<ExifCopyright> {
    let mut end = value.len();
    while end > 0 && value[end - 1] == 0 {
        end -= 1;
    }
    let trimmed = &value[..end];
    let (first, rest) = match trimmed.iter().position(|&b| b == 0) {
        Some(i) => (&trimmed[..i], Some(&trimmed[i + 1..])),
        None => (trimmed, None),
    };
    let text = String::from_utf8_lossy(first).into_owned();
    if text.trim().is_empty() {
        return None;
    }
    let trailing = rest
        .map(|r| String::from_utf8_lossy(r).into_owned())
        .filter(|r| !r.trim().is_empty());
    Some(ExifCopyright { text, trailing })
}
