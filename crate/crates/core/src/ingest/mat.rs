//! MAT v5 reader for the double-precision numeric subset.
//!
//! Supported: the 128-byte v5 header in either endianness, `miMATRIX`
//! elements of class `mxDOUBLE_CLASS` (real only, 2-D, either dimension may
//! be 1), the small-data-element tag format, and transparent inflation of
//! `miCOMPRESSED` elements. Everything else is reported as a typed error
//! rather than skipped silently.

use std::io::Read;
use std::path::Path;

use flate2::read::ZlibDecoder;

use super::{ChannelMap, ChannelSource, IngestError, Recording};

// MAT v5 data element types.
const MI_INT8: u32 = 1;
const MI_UINT8: u32 = 2;
const MI_INT16: u32 = 3;
const MI_UINT16: u32 = 4;
const MI_INT32: u32 = 5;
const MI_UINT32: u32 = 6;
const MI_SINGLE: u32 = 7;
const MI_DOUBLE: u32 = 9;
const MI_INT64: u32 = 12;
const MI_UINT64: u32 = 13;
const MI_MATRIX: u32 = 14;
const MI_COMPRESSED: u32 = 15;

// mxCLASS codes carried in the array-flags subelement.
const MX_DOUBLE_CLASS: u8 = 6;

const HEADER_LEN: usize = 128;
const FLAG_COMPLEX: u8 = 0x08;
const FLAG_LOGICAL: u8 = 0x02;

/// One numeric variable: `rows x cols` doubles in column-major order.
struct MatVar {
    name: String,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Parse a MAT v5 file and extract the mapped channels.
pub fn read_mat(path: &Path, map: &ChannelMap) -> Result<Recording, IngestError> {
    let path_str = path.to_string_lossy().into_owned();
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io {
        path: path_str.clone(),
        source,
    })?;
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path_str.clone());
    let vars = parse_mat_bytes(&bytes, &path_str)?;
    resolve_channels(&file_name, &path_str, &vars, map)
}

fn corrupt(path: &str, detail: impl Into<String>) -> IngestError {
    IngestError::CorruptFile {
        path: path.to_string(),
        detail: detail.into(),
    }
}

fn unsupported(path: &str, what: impl Into<String>) -> IngestError {
    IngestError::UnsupportedMatFeature {
        path: path.to_string(),
        what: what.into(),
    }
}

fn parse_mat_bytes(bytes: &[u8], path: &str) -> Result<Vec<MatVar>, IngestError> {
    if bytes.len() < HEADER_LEN {
        return Err(corrupt(path, "shorter than the 128-byte MAT v5 header"));
    }
    let little_endian = match &bytes[126..128] {
        b"IM" => true,
        b"MI" => false,
        other => {
            return Err(corrupt(
                path,
                format!("endian indicator {other:?} is neither `MI` nor `IM`"),
            ))
        }
    };
    let version = if little_endian {
        u16::from_le_bytes([bytes[124], bytes[125]])
    } else {
        u16::from_be_bytes([bytes[124], bytes[125]])
    };
    if version != 0x0100 {
        return Err(unsupported(
            path,
            format!("MAT version 0x{version:04x} (only v5 = 0x0100 is supported)"),
        ));
    }

    let mut vars = Vec::new();
    collect_elements(&bytes[HEADER_LEN..], little_endian, path, false, &mut vars)?;
    Ok(vars)
}

/// Walk a sequence of data elements, appending every matrix found.
fn collect_elements(
    mut buf: &[u8],
    le: bool,
    path: &str,
    inside_compressed: bool,
    vars: &mut Vec<MatVar>,
) -> Result<(), IngestError> {
    while !buf.is_empty() {
        let (ty, payload, rest) = next_element(buf, le, path)?;
        match ty {
            MI_MATRIX => vars.push(parse_matrix(payload, le, path)?),
            MI_COMPRESSED => {
                if inside_compressed {
                    return Err(corrupt(path, "nested miCOMPRESSED element"));
                }
                let mut inflated = Vec::new();
                ZlibDecoder::new(payload)
                    .read_to_end(&mut inflated)
                    .map_err(|e| corrupt(path, format!("zlib inflation failed: {e}")))?;
                collect_elements(&inflated, le, path, true, vars)?;
            }
            other => {
                return Err(unsupported(
                    path,
                    format!("top-level element type {other}"),
                ))
            }
        }
        buf = rest;
    }
    Ok(())
}

/// Decode one element tag; returns `(type, payload, rest-after-padding)`.
///
/// Handles both the regular 8-byte tag and the packed small-data-element
/// form (type and byte count share the first word, data lives in the
/// second). Regular element payloads are padded to 8-byte boundaries;
/// padding may be absent after the final element.
fn next_element<'a>(
    buf: &'a [u8],
    le: bool,
    path: &str,
) -> Result<(u32, &'a [u8], &'a [u8]), IngestError> {
    if buf.len() < 8 {
        return Err(corrupt(path, "truncated element tag"));
    }
    let word = read_u32(&buf[0..4], le);
    if word >> 16 != 0 {
        // Small data element: byte count in the upper half-word.
        let ty = word & 0xFFFF;
        let size = (word >> 16) as usize;
        if size > 4 {
            return Err(corrupt(path, format!("small element size {size} > 4")));
        }
        return Ok((ty, &buf[4..4 + size], &buf[8..]));
    }
    let size = read_u32(&buf[4..8], le) as usize;
    if buf.len() < 8 + size {
        return Err(corrupt(
            path,
            format!("element of {size} bytes exceeds file bounds"),
        ));
    }
    let payload = &buf[8..8 + size];
    let padded = 8 + size + padding(size);
    let rest = if buf.len() >= padded {
        &buf[padded..]
    } else {
        &buf[buf.len()..]
    };
    Ok((word, payload, rest))
}

fn padding(size: usize) -> usize {
    (8 - size % 8) % 8
}

fn read_u32(bytes: &[u8], le: bool) -> u32 {
    let arr: [u8; 4] = bytes.try_into().unwrap();
    if le {
        u32::from_le_bytes(arr)
    } else {
        u32::from_be_bytes(arr)
    }
}

fn class_name(class: u8) -> &'static str {
    match class {
        1 => "cell array",
        2 => "struct",
        3 => "object",
        4 => "char array",
        5 => "sparse array",
        6 => "double",
        7 => "single",
        8 => "int8",
        9 => "uint8",
        10 => "int16",
        11 => "uint16",
        12 => "int32",
        13 => "uint32",
        14 => "int64",
        15 => "uint64",
        _ => "unknown class",
    }
}

/// Parse the subelements of one `miMATRIX` payload.
fn parse_matrix(payload: &[u8], le: bool, path: &str) -> Result<MatVar, IngestError> {
    // Array flags.
    let (ty, flags_data, rest) = next_element(payload, le, path)?;
    if ty != MI_UINT32 || flags_data.len() != 8 {
        return Err(corrupt(path, "malformed array-flags subelement"));
    }
    let flags_word = read_u32(&flags_data[0..4], le);
    let class = (flags_word & 0xFF) as u8;
    let flag_bits = ((flags_word >> 8) & 0xFF) as u8;
    if class != MX_DOUBLE_CLASS {
        return Err(unsupported(
            path,
            format!("array class `{}`", class_name(class)),
        ));
    }
    if flag_bits & FLAG_COMPLEX != 0 {
        return Err(unsupported(path, "complex array"));
    }
    if flag_bits & FLAG_LOGICAL != 0 {
        return Err(unsupported(path, "logical array"));
    }

    // Dimensions.
    let (ty, dims_data, rest) = next_element(rest, le, path)?;
    if ty != MI_INT32 || dims_data.len() % 4 != 0 {
        return Err(corrupt(path, "malformed dimensions subelement"));
    }
    let ndims = dims_data.len() / 4;
    if ndims != 2 {
        return Err(unsupported(path, format!("{ndims}-dimensional array")));
    }
    let rows = read_u32(&dims_data[0..4], le) as i32;
    let cols = read_u32(&dims_data[4..8], le) as i32;
    if rows < 0 || cols < 0 {
        return Err(corrupt(path, "negative array dimension"));
    }
    let (rows, cols) = (rows as usize, cols as usize);

    // Array name.
    let (ty, name_data, rest) = next_element(rest, le, path)?;
    if ty != MI_INT8 {
        return Err(corrupt(path, "malformed array-name subelement"));
    }
    let name = String::from_utf8(name_data.to_vec())
        .map_err(|_| corrupt(path, "array name is not valid UTF-8"))?;

    // Real part. The stored element type may be narrower than double; the
    // array class, checked above, is what fixes the value semantics.
    let (ty, real_data, rest) = next_element(rest, le, path)?;
    let data = decode_numeric(ty, real_data, le, path)?;
    let expected = rows
        .checked_mul(cols)
        .ok_or_else(|| corrupt(path, "dimension product overflow"))?;
    if data.len() != expected {
        return Err(corrupt(
            path,
            format!(
                "variable `{name}` carries {} values for a {rows}x{cols} array",
                data.len()
            ),
        ));
    }
    if !rest.is_empty() {
        // A trailing subelement on a real double array would be an imaginary
        // part that contradicts the flags word.
        return Err(corrupt(
            path,
            format!("unexpected trailing subelement in variable `{name}`"),
        ));
    }

    Ok(MatVar {
        name,
        rows,
        cols,
        data,
    })
}

fn decode_numeric(ty: u32, data: &[u8], le: bool, path: &str) -> Result<Vec<f64>, IngestError> {
    macro_rules! decode {
        ($t:ty, $width:expr) => {{
            if data.len() % $width != 0 {
                return Err(corrupt(path, "numeric data length not a multiple of width"));
            }
            Ok(data
                .chunks_exact($width)
                .map(|c| {
                    let arr: [u8; $width] = c.try_into().unwrap();
                    let v = if le {
                        <$t>::from_le_bytes(arr)
                    } else {
                        <$t>::from_be_bytes(arr)
                    };
                    v as f64
                })
                .collect())
        }};
    }
    match ty {
        MI_DOUBLE => decode!(f64, 8),
        MI_SINGLE => decode!(f32, 4),
        MI_INT8 => decode!(i8, 1),
        MI_UINT8 => decode!(u8, 1),
        MI_INT16 => decode!(i16, 2),
        MI_UINT16 => decode!(u16, 2),
        MI_INT32 => decode!(i32, 4),
        MI_UINT32 => decode!(u32, 4),
        MI_INT64 => decode!(i64, 8),
        MI_UINT64 => decode!(u64, 8),
        other => Err(unsupported(
            path,
            format!("numeric storage type {other}"),
        )),
    }
}

fn resolve_channels(
    file_name: &str,
    path: &str,
    vars: &[MatVar],
    map: &ChannelMap,
) -> Result<Recording, IngestError> {
    let find = |name: &str| -> Result<&MatVar, IngestError> {
        vars.iter()
            .find(|v| v.name == name)
            .ok_or_else(|| IngestError::MissingVariable {
                path: path.to_string(),
                name: name.to_string(),
            })
    };

    let mut channels = Vec::with_capacity(map.len());
    for (source, label) in map.entries() {
        let samples = match source {
            ChannelSource::Variable(name) => {
                let var = find(name)?;
                if var.rows > 1 && var.cols > 1 {
                    return Err(IngestError::InvalidChannelMap {
                        detail: format!(
                            "variable `{name}` is {}x{}; address one column as `{name}:<col>`",
                            var.rows, var.cols
                        ),
                    });
                }
                var.data.clone()
            }
            ChannelSource::VariableColumn(name, col) => {
                let var = find(name)?;
                if *col >= var.cols {
                    return Err(IngestError::InvalidChannelMap {
                        detail: format!(
                            "column {col} out of range for variable `{name}` ({} columns)",
                            var.cols
                        ),
                    });
                }
                var.data[col * var.rows..(col + 1) * var.rows].to_vec()
            }
            ChannelSource::ColumnIndex(idx) => {
                return Err(IngestError::InvalidChannelMap {
                    detail: format!("bare column index {idx} cannot address a MAT file"),
                });
            }
        };
        channels.push((label.clone(), samples));
    }
    Recording::from_named_file(file_name, channels)
}
