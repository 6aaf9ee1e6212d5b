//! JVM field and method descriptor grammar.

/// Length of the field type starting at the beginning of `s`, or `None`
/// when `s` does not start with a well-formed field type.
fn field_type_len(s: &[u8]) -> Option<usize> {
    let mut i = 0;
    while s.get(i) == Some(&b'[') {
        i += 1;
    }
    // at most 255 array dimensions
    if i > 255 {
        return None;
    }
    match *s.get(i)? {
        b'B' | b'C' | b'D' | b'F' | b'I' | b'J' | b'S' | b'Z' => Some(i + 1),
        b'L' => {
            let rest = &s[i + 1..];
            let end = rest.iter().position(|&b| b == b';')?;
            let name = &rest[..end];
            if name.is_empty() || name.iter().any(|&b| b == b'.' || b == b'[') {
                return None;
            }
            Some(i + 1 + end + 1)
        }
        _ => None,
    }
}

/// Whether `s` is exactly one field descriptor, e.g. `[Ljava/lang/String;`.
pub fn is_field_descriptor(s: &str) -> bool {
    field_type_len(s.as_bytes()) == Some(s.len())
}

/// Whether `s` is a well-formed method descriptor, e.g. `([BII)V`.
pub fn is_method_descriptor(s: &str) -> bool {
    parameter_count(s).is_some()
}

/// Number of declared parameters, or `None` if the descriptor is malformed.
pub fn parameter_count(s: &str) -> Option<usize> {
    let b = s.as_bytes();
    if b.first() != Some(&b'(') {
        return None;
    }
    let mut i = 1;
    let mut count = 0;
    loop {
        match b.get(i)? {
            b')' => break,
            _ => {
                i += field_type_len(&b[i..])?;
                count += 1;
            }
        }
    }
    let ret = &b[i + 1..];
    if ret == b"V" || field_type_len(ret) == Some(ret.len()) {
        Some(count)
    } else {
        None
    }
}

/// Class named by an object field descriptor (`Lorg/junit/Test;` -> `org/junit/Test`).
pub fn object_type_name(desc: &str) -> Option<&str> {
    desc.strip_prefix('L')?.strip_suffix(';')
}

/// Element class of a class-constant name, which may be an array descriptor.
///
/// `java/lang/String` stays as is, `[[Ljava/lang/String;` yields
/// `java/lang/String`, primitive arrays yield `None`.
pub fn element_class(name: &str) -> Option<&str> {
    if !name.starts_with('[') {
        return Some(name);
    }
    object_type_name(name.trim_start_matches('['))
}
