#![allow(dead_code)]

use ioscope_core::{
    CallKind, CallSite, ClassFlags, ClassModel, MethodFlags, MethodModel, MethodRef, Origin,
};

pub fn mref(s: &str) -> MethodRef {
    s.parse().unwrap()
}

pub fn class(name: &str, super_name: Option<&str>, origin: Origin) -> ClassModel {
    ClassModel {
        name: name.to_string(),
        super_name: super_name.map(str::to_string),
        interfaces: Vec::new(),
        methods: Vec::new(),
        flags: ClassFlags(ClassFlags::PUBLIC),
        origin,
        major_version: 61,
        module: None,
        referenced_classes: Vec::new(),
    }
}

pub fn method(class: &ClassModel, name: &str, desc: &str, flags: u16) -> MethodModel {
    let body = flags & (MethodFlags::NATIVE | MethodFlags::ABSTRACT) == 0;
    MethodModel {
        method: MethodRef::new(class.name.as_str(), name, desc).unwrap(),
        flags: MethodFlags(flags),
        origin: class.origin,
        call_sites: Vec::new(),
        new_types: Vec::new(),
        code_size_bytes: if body { 1 } else { 0 },
        statement_units: 0,
        instruction_count: body as u32,
        annotations: Vec::new(),
    }
}

pub fn call(kind: CallKind, target: &str) -> CallSite {
    CallSite { kind, target: mref(target) }
}

pub fn object() -> ClassModel {
    let mut c = class("java/lang/Object", None, Origin::Runtime);
    let init = method(&c, "<init>", "()V", MethodFlags::PUBLIC);
    c.methods.push(init);
    c
}

/// Assembles a class `T extends java/lang/Object` with one static method
/// `m()V` whose code array is `code`. Constant #9 is `T.m()V`, usable as an
/// `invokestatic` operand.
pub fn class_with_code(code: &[u8]) -> Vec<u8> {
    let mut b = Vec::new();
    b.extend_from_slice(&0xCAFE_BABEu32.to_be_bytes());
    b.extend_from_slice(&[0, 0, 0, 61]);
    let mut cp: Vec<Vec<u8>> = Vec::new();
    let utf8 = |s: &str| {
        let mut v = vec![1];
        v.extend_from_slice(&(s.len() as u16).to_be_bytes());
        v.extend_from_slice(s.as_bytes());
        v
    };
    cp.push(utf8("T")); // 1
    cp.push(vec![7, 0, 1]); // 2
    cp.push(utf8("java/lang/Object")); // 3
    cp.push(vec![7, 0, 3]); // 4
    cp.push(utf8("m")); // 5
    cp.push(utf8("()V")); // 6
    cp.push(utf8("Code")); // 7
    cp.push(vec![12, 0, 5, 0, 6]); // 8
    cp.push(vec![10, 0, 2, 0, 8]); // 9
    b.extend_from_slice(&((cp.len() + 1) as u16).to_be_bytes());
    for e in &cp {
        b.extend_from_slice(e);
    }
    b.extend_from_slice(&[0x00, 0x21, 0, 2, 0, 4, 0, 0, 0, 0]);
    b.extend_from_slice(&[0, 1]); // methods
    b.extend_from_slice(&[0x00, 0x09, 0, 5, 0, 6, 0, 1]);
    b.extend_from_slice(&[0, 7]);
    let attr_len = 12 + code.len();
    b.extend_from_slice(&(attr_len as u32).to_be_bytes());
    b.extend_from_slice(&[0, 4, 0, 4]);
    b.extend_from_slice(&(code.len() as u32).to_be_bytes());
    b.extend_from_slice(code);
    b.extend_from_slice(&[0, 0, 0, 0]);
    b.extend_from_slice(&[0, 0]); // class attributes
    b
}
