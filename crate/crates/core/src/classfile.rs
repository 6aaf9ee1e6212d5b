//! Class-file parser.
//!
//! Reads just enough of the format to extract methods, their flags and
//! annotations, invocation sites, instantiated types and a size measure.
//! Constant-pool entries are decoded eagerly but only validated when
//! something actually references them, so unused garbage entries are fine.
//!
//! # Statement units
//!
//! `statement_units` approximates a statement count by counting
//! instructions from these families:
//!
//! * local variable stores (`istore`..`astore_3`) and `iinc`
//! * field puts (`putfield`, `putstatic`) and array stores (`iastore`..`sastore`)
//! * the five invocation instructions
//! * returns, `athrow`, `monitorenter`, `monitorexit`
//!
//! A `wide` prefix and its operand instruction count once. The void
//! `return` that terminates a code array is not counted, so a body that is
//! only `return` measures 0.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::descriptor;
use crate::model::{
    CallKind, CallSite, ClassFlags, ClassModel, MethodFlags, MethodModel, MethodRef, Origin,
    DYNAMIC_CLASS,
};

/// Highest accepted major version (Java 17).
pub const MAX_SUPPORTED_MAJOR: u16 = 61;
const MIN_MAJOR: u16 = 45;
const MAGIC: u32 = 0xCAFE_BABE;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassFileError {
    #[error("malformed class file at byte {offset}: {reason}")]
    Malformed { offset: usize, reason: String },
    #[error("unsupported class-file version {major}.{minor} (newest supported major version is {max})", max = MAX_SUPPORTED_MAJOR)]
    UnsupportedVersion { major: u16, minor: u16 },
}

type Result<T> = core::result::Result<T, ClassFileError>;

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
    /// offset of `data[0]` within the whole class file, for error reporting
    base: usize,
}

impl<'a> Reader<'a> {
    fn new(data: &'a [u8], base: usize) -> Self {
        Self { data, pos: 0, base }
    }

    fn offset(&self) -> usize {
        self.base + self.pos
    }

    fn malformed<T>(&self, reason: impl Into<String>) -> Result<T> {
        Err(ClassFileError::Malformed { offset: self.offset(), reason: reason.into() })
    }

    fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        match self.pos.checked_add(n) {
            Some(end) if end <= self.data.len() => {
                let s = &self.data[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            _ => self.malformed("unexpected end of data"),
        }
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.bytes(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.bytes(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn sub(&mut self, n: usize) -> Result<Reader<'a>> {
        let base = self.offset();
        Ok(Reader::new(self.bytes(n)?, base))
    }

    fn is_empty(&self) -> bool {
        self.pos == self.data.len()
    }
}

#[derive(Debug, Clone)]
enum Constant {
    /// index 0 and the slot after a long/double
    Unusable,
    Utf8(String),
    /// undecodable modified UTF-8; only an error if referenced
    BadUtf8,
    Literal,
    Class(u16),
    Str,
    MemberRef { class: u16, name_and_type: u16 },
    NameAndType { name: u16, descriptor: u16 },
    MethodHandle,
    MethodType,
    Dynamic,
    InvokeDynamic { name_and_type: u16 },
    Module(u16),
    Package,
}

struct ConstantPool {
    entries: Vec<Constant>,
    /// offset of the pool in the file, for error messages
    offset: usize,
}

impl ConstantPool {
    fn parse(r: &mut Reader<'_>) -> Result<Self> {
        let offset = r.offset();
        let count = r.u16()? as usize;
        if count == 0 {
            return r.malformed("constant pool count is 0");
        }
        let mut entries = Vec::with_capacity(count);
        entries.push(Constant::Unusable);
        while entries.len() < count {
            let tag = r.u8()?;
            let entry = match tag {
                1 => {
                    let len = r.u16()? as usize;
                    match decode_modified_utf8(r.bytes(len)?) {
                        Some(s) => Constant::Utf8(s),
                        None => Constant::BadUtf8,
                    }
                }
                3 | 4 => {
                    r.u32()?;
                    Constant::Literal
                }
                5 | 6 => {
                    r.bytes(8)?;
                    entries.push(Constant::Literal);
                    if entries.len() == count {
                        return r.malformed("long/double constant occupies the last pool slot");
                    }
                    Constant::Unusable
                }
                7 => Constant::Class(r.u16()?),
                8 => {
                    r.u16()?;
                    Constant::Str
                }
                9..=11 => Constant::MemberRef { class: r.u16()?, name_and_type: r.u16()? },
                12 => Constant::NameAndType { name: r.u16()?, descriptor: r.u16()? },
                15 => {
                    r.u8()?;
                    r.u16()?;
                    Constant::MethodHandle
                }
                16 => {
                    r.u16()?;
                    Constant::MethodType
                }
                17 => {
                    r.bytes(4)?;
                    Constant::Dynamic
                }
                18 => {
                    r.u16()?;
                    Constant::InvokeDynamic { name_and_type: r.u16()? }
                }
                19 => Constant::Module(r.u16()?),
                20 => {
                    r.u16()?;
                    Constant::Package
                }
                other => return r.malformed(format!("unknown constant-pool tag {other}")),
            };
            entries.push(entry);
        }
        Ok(Self { entries, offset })
    }

    fn bad<T>(&self, index: u16, what: &str) -> Result<T> {
        Err(ClassFileError::Malformed {
            offset: self.offset,
            reason: format!("constant-pool index {index} is not a valid {what}"),
        })
    }

    fn get(&self, index: u16) -> Option<&Constant> {
        self.entries.get(index as usize)
    }

    fn utf8(&self, index: u16) -> Result<&str> {
        match self.get(index) {
            Some(Constant::Utf8(s)) => Ok(s),
            _ => self.bad(index, "Utf8 entry"),
        }
    }

    fn class_name(&self, index: u16) -> Result<&str> {
        match self.get(index) {
            Some(Constant::Class(name)) => self.utf8(*name),
            _ => self.bad(index, "Class entry"),
        }
    }

    fn name_and_type(&self, index: u16) -> Result<(&str, &str)> {
        match self.get(index) {
            Some(Constant::NameAndType { name, descriptor }) => {
                Ok((self.utf8(*name)?, self.utf8(*descriptor)?))
            }
            _ => self.bad(index, "NameAndType entry"),
        }
    }

    fn method_ref(&self, index: u16) -> Result<MethodRef> {
        match self.get(index) {
            Some(Constant::MemberRef { class, name_and_type }) => {
                let class = self.class_name(*class)?;
                let (name, desc) = self.name_and_type(*name_and_type)?;
                MethodRef::new(class, name, desc).or_else(|_| self.bad(index, "method reference"))
            }
            _ => self.bad(index, "Methodref entry"),
        }
    }

    fn invoke_dynamic(&self, index: u16) -> Result<MethodRef> {
        match self.get(index) {
            Some(Constant::InvokeDynamic { name_and_type }) => {
                let (name, desc) = self.name_and_type(*name_and_type)?;
                MethodRef::new(DYNAMIC_CLASS, name, desc)
                    .or_else(|_| self.bad(index, "invokedynamic call site"))
            }
            _ => self.bad(index, "InvokeDynamic entry"),
        }
    }

    fn module_name(&self, index: u16) -> Result<&str> {
        match self.get(index) {
            Some(Constant::Module(name)) => self.utf8(*name),
            _ => self.bad(index, "Module entry"),
        }
    }

    /// All class names that resolve cleanly, reduced to element classes.
    fn class_names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().filter_map(move |e| match e {
            Constant::Class(i) => match self.get(*i) {
                Some(Constant::Utf8(s)) => descriptor::element_class(s),
                _ => None,
            },
            _ => None,
        })
    }
}

/// Decodes the JVM's modified UTF-8. Unpaired surrogates are replaced.
fn decode_modified_utf8(bytes: &[u8]) -> Option<String> {
    if !bytes.iter().any(|&b| b == 0 || b == 0xC0 || b >= 0xED) {
        // no NUL, encoded NUL, surrogate or 4-byte lead bytes: standard UTF-8 rules agree
        return core::str::from_utf8(bytes).ok().map(ToString::to_string);
    }
    let mut units: Vec<u16> = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let cont = |k: usize| bytes.get(i + k).copied().filter(|b| b & 0xC0 == 0x80);
        if c & 0x80 == 0 {
            if c == 0 {
                return None;
            }
            units.push(c as u16);
            i += 1;
        } else if c & 0xE0 == 0xC0 {
            let b1 = cont(1)?;
            units.push(((c as u16 & 0x1F) << 6) | (b1 as u16 & 0x3F));
            i += 2;
        } else if c & 0xF0 == 0xE0 {
            let (b1, b2) = (cont(1)?, cont(2)?);
            units.push(((c as u16 & 0x0F) << 12) | ((b1 as u16 & 0x3F) << 6) | (b2 as u16 & 0x3F));
            i += 3;
        } else {
            return None;
        }
    }
    Some(String::from_utf16_lossy(&units))
}

/// What a scan of one code array yields.
#[derive(Debug, Default)]
struct CodeFacts {
    call_sites: Vec<CallSite>,
    new_types: Vec<String>,
    statement_units: u32,
    instruction_count: u32,
}

/// Operand length (excluding the opcode byte) for fixed-length opcodes.
fn fixed_operand_len(op: u8) -> Option<usize> {
    Some(match op {
        0x00..=0x0f => 0,
        0x10 => 1,
        0x11 => 2,
        0x12 => 1,
        0x13 | 0x14 => 2,
        0x15..=0x19 => 1,
        0x1a..=0x35 => 0,
        0x36..=0x3a => 1,
        0x3b..=0x83 => 0,
        0x84 => 2,
        0x85..=0x98 => 0,
        0x99..=0xa8 => 2,
        0xa9 => 1,
        0xac..=0xb1 => 0,
        0xb2..=0xb8 => 2,
        0xb9 | 0xba => 4,
        0xbb => 2,
        0xbc => 1,
        0xbd => 2,
        0xbe | 0xbf => 0,
        0xc0 | 0xc1 => 2,
        0xc2 | 0xc3 => 0,
        0xc5 => 3,
        0xc6 | 0xc7 => 2,
        0xc8 | 0xc9 => 4,
        0xca => 0,
        _ => return None,
    })
}

fn is_statement(op: u8) -> bool {
    matches!(op,
        0x36..=0x4e       // stores to locals
        | 0x4f..=0x56     // array stores
        | 0x84            // iinc
        | 0xb3 | 0xb5     // putstatic, putfield
        | 0xb6..=0xba     // invocations
        | 0xac..=0xb1     // returns
        | 0xbf            // athrow
        | 0xc2 | 0xc3)    // monitorenter, monitorexit
}

fn be_i32(code: &[u8], at: usize) -> Option<i32> {
    let b = code.get(at..at + 4)?;
    Some(i32::from_be_bytes([b[0], b[1], b[2], b[3]]))
}

fn scan_code(code: &[u8], code_offset: usize, cp: &ConstantPool) -> Result<CodeFacts> {
    let mut facts = CodeFacts::default();
    let truncated = |pc: usize| ClassFileError::Malformed {
        offset: code_offset + pc,
        reason: "instruction runs past the end of the code array".to_string(),
    };
    let mut pc = 0;
    while pc < code.len() {
        let op = code[pc];
        let len = match op {
            0xaa => {
                let base = (pc + 4) & !3;
                let low = be_i32(code, base + 4).ok_or_else(|| truncated(pc))?;
                let high = be_i32(code, base + 8).ok_or_else(|| truncated(pc))?;
                if high < low {
                    return Err(ClassFileError::Malformed {
                        offset: code_offset + pc,
                        reason: "tableswitch with high < low".to_string(),
                    });
                }
                let n = (high as i64 - low as i64 + 1) as usize;
                base + 12 + n * 4 - pc
            }
            0xab => {
                let base = (pc + 4) & !3;
                let npairs = be_i32(code, base + 4).ok_or_else(|| truncated(pc))?;
                if npairs < 0 {
                    return Err(ClassFileError::Malformed {
                        offset: code_offset + pc,
                        reason: "lookupswitch with negative pair count".to_string(),
                    });
                }
                base + 8 + npairs as usize * 8 - pc
            }
            0xc4 => match code.get(pc + 1) {
                Some(0x84) => 6,
                Some(0x15..=0x19 | 0x36..=0x3a | 0xa9) => 4,
                Some(_) => {
                    return Err(ClassFileError::Malformed {
                        offset: code_offset + pc,
                        reason: "wide applied to an opcode that cannot be widened".to_string(),
                    })
                }
                None => return Err(truncated(pc)),
            },
            _ => match fixed_operand_len(op) {
                Some(n) => n + 1,
                None => {
                    return Err(ClassFileError::Malformed {
                        offset: code_offset + pc,
                        reason: format!("invalid opcode 0x{op:02x}"),
                    })
                }
            },
        };
        if pc + len > code.len() {
            return Err(truncated(pc));
        }
        facts.instruction_count += 1;

        let counted_op = if op == 0xc4 { code[pc + 1] } else { op };
        let final_void_return = op == 0xb1 && pc + 1 == code.len();
        if is_statement(counted_op) && !final_void_return {
            facts.statement_units += 1;
        }

        let index = || u16::from_be_bytes([code[pc + 1], code[pc + 2]]);
        if let Some(kind) = CallKind::from_opcode(op) {
            let target = if kind == CallKind::Dynamic {
                cp.invoke_dynamic(index())?
            } else {
                cp.method_ref(index())?
            };
            facts.call_sites.push(CallSite { kind, target });
        } else if op == 0xbb {
            facts.new_types.push(cp.class_name(index())?.to_string());
        }
        pc += len;
    }
    Ok(facts)
}

fn skip_element_value(r: &mut Reader<'_>) -> Result<()> {
    match r.u8()? {
        b'B' | b'C' | b'D' | b'F' | b'I' | b'J' | b'S' | b'Z' | b's' | b'c' => {
            r.u16()?;
        }
        b'e' => {
            r.u16()?;
            r.u16()?;
        }
        b'@' => {
            read_annotation(r)?;
        }
        b'[' => {
            for _ in 0..r.u16()? {
                skip_element_value(r)?;
            }
        }
        t => return r.malformed(format!("unknown annotation element tag {t:#x}")),
    }
    Ok(())
}

/// Reads one annotation and returns its type-descriptor index.
fn read_annotation(r: &mut Reader<'_>) -> Result<u16> {
    let type_index = r.u16()?;
    for _ in 0..r.u16()? {
        r.u16()?;
        skip_element_value(r)?;
    }
    Ok(type_index)
}

fn read_annotations(r: &mut Reader<'_>, cp: &ConstantPool, out: &mut Vec<String>) -> Result<()> {
    for _ in 0..r.u16()? {
        let type_index = read_annotation(r)?;
        let desc = cp.utf8(type_index)?;
        match descriptor::object_type_name(desc) {
            Some(name) => out.push(name.to_string()),
            None => return cp.bad(type_index, "annotation type descriptor"),
        }
    }
    Ok(())
}

fn parse_method(r: &mut Reader<'_>, cp: &ConstantPool, class_name: &str) -> Result<MethodModel> {
    let mut flags = MethodFlags(r.u16()?);
    let name = cp.utf8(r.u16()?)?;
    let desc_index = r.u16()?;
    let desc = cp.utf8(desc_index)?;
    let method = MethodRef::new(class_name, name, desc)
        .or_else(|_| cp.bad(desc_index, "method descriptor"))?;

    let mut facts = CodeFacts::default();
    let mut code_size_bytes = 0u32;
    let mut has_code = false;
    let mut annotations = Vec::new();
    for _ in 0..r.u16()? {
        let attr_name = cp.utf8(r.u16()?)?;
        let len = r.u32()? as usize;
        let mut a = r.sub(len)?;
        match attr_name {
            "Code" => {
                if has_code {
                    return a.malformed("duplicate Code attribute");
                }
                has_code = true;
                a.u16()?;
                a.u16()?;
                let code_len = a.u32()? as usize;
                let code_offset = a.offset();
                let code = a.bytes(code_len)?;
                facts = scan_code(code, code_offset, cp)?;
                code_size_bytes = code_len as u32;
                let handlers = a.u16()? as usize;
                a.bytes(handlers * 8)?;
                for _ in 0..a.u16()? {
                    a.u16()?;
                    let n = a.u32()? as usize;
                    a.bytes(n)?;
                }
                if !a.is_empty() {
                    return a.malformed("Code attribute length disagrees with its contents");
                }
            }
            "Synthetic" => flags.0 |= MethodFlags::SYNTHETIC,
            "RuntimeVisibleAnnotations" | "RuntimeInvisibleAnnotations" => {
                read_annotations(&mut a, cp, &mut annotations)?;
            }
            _ => {}
        }
    }
    if has_code && (flags.is_native() || flags.is_abstract()) {
        return r.malformed(format!("native or abstract method {method} carries a Code attribute"));
    }
    annotations.sort();
    annotations.dedup();
    Ok(MethodModel {
        method,
        flags,
        origin: Origin::Project,
        call_sites: facts.call_sites,
        new_types: facts.new_types,
        code_size_bytes,
        statement_units: facts.statement_units,
        instruction_count: facts.instruction_count,
        annotations,
    })
}

fn skip_member(r: &mut Reader<'_>) -> Result<()> {
    r.bytes(6)?;
    for _ in 0..r.u16()? {
        r.u16()?;
        let len = r.u32()? as usize;
        r.bytes(len)?;
    }
    Ok(())
}

/// Parses a complete class file. Origin defaults to [`Origin::Project`];
/// use [`ClassModel::with_origin`] to re-tag.
pub fn parse_class(bytes: &[u8]) -> Result<ClassModel> {
    let mut r = Reader::new(bytes, 0);
    if bytes.len() < 4 || r.u32()? != MAGIC {
        return Err(ClassFileError::Malformed { offset: 0, reason: "bad magic number".to_string() });
    }
    let minor = r.u16()?;
    let major = r.u16()?;
    if major > MAX_SUPPORTED_MAJOR {
        return Err(ClassFileError::UnsupportedVersion { major, minor });
    }
    if major < MIN_MAJOR {
        return r.malformed(format!("major version {major} predates the class-file format"));
    }
    let cp = ConstantPool::parse(&mut r)?;
    let flags = ClassFlags(r.u16()?);
    let name = cp.class_name(r.u16()?)?.to_string();
    let super_name = match r.u16()? {
        0 => None,
        i => Some(cp.class_name(i)?.to_string()),
    };
    let mut interfaces = Vec::new();
    for _ in 0..r.u16()? {
        interfaces.push(cp.class_name(r.u16()?)?.to_string());
    }
    for _ in 0..r.u16()? {
        skip_member(&mut r)?;
    }
    let mut methods = Vec::new();
    for _ in 0..r.u16()? {
        methods.push(parse_method(&mut r, &cp, &name)?);
    }
    let mut flags = flags;
    let mut module = None;
    for _ in 0..r.u16()? {
        let attr_name = cp.utf8(r.u16()?)?;
        let len = r.u32()? as usize;
        let mut a = r.sub(len)?;
        match attr_name {
            "Synthetic" => flags.0 |= ClassFlags::SYNTHETIC,
            "Module" if flags.is_module() => module = Some(cp.module_name(a.u16()?)?.to_string()),
            _ => {}
        }
    }
    if !r.is_empty() {
        return r.malformed("trailing bytes after class attributes");
    }

    let mut referenced_classes: Vec<String> = cp
        .class_names()
        .filter(|c| *c != name)
        .map(ToString::to_string)
        .collect();
    referenced_classes.sort();
    referenced_classes.dedup();

    Ok(ClassModel {
        name,
        super_name,
        interfaces,
        methods,
        flags,
        origin: Origin::Project,
        major_version: major,
        module,
        referenced_classes,
    })
}
