//! Structural model of parsed classes and methods.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::descriptor;

/// Globally unique identity of a JVM method.
///
/// Ordering is lexicographic by class, then name, then descriptor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MethodRef {
    pub class_name: String,
    pub method_name: String,
    pub descriptor: String,
}

/// Class name of the pseudo-node that stands in for every `invokedynamic` target.
pub const DYNAMIC_CLASS: &str = "<dynamic>";

impl MethodRef {
    /// Builds a reference, checking the descriptor grammar.
    pub fn new(
        class_name: impl Into<String>,
        method_name: impl Into<String>,
        descriptor: impl Into<String>,
    ) -> Result<Self, MethodRefError> {
        let r = Self {
            class_name: class_name.into(),
            method_name: method_name.into(),
            descriptor: descriptor.into(),
        };
        if r.class_name.is_empty() || r.method_name.is_empty() {
            return Err(MethodRefError::EmptyName);
        }
        if !descriptor::is_method_descriptor(&r.descriptor) {
            return Err(MethodRefError::BadDescriptor(r.descriptor));
        }
        Ok(r)
    }

    /// The single node every `invokedynamic` call site is linked to.
    pub fn dynamic_invoke() -> Self {
        Self {
            class_name: DYNAMIC_CLASS.to_string(),
            method_name: "invoke".to_string(),
            descriptor: "([Ljava/lang/Object;)Ljava/lang/Object;".to_string(),
        }
    }

    pub fn is_dynamic_pseudo(&self) -> bool {
        self.class_name == DYNAMIC_CLASS
    }

    pub fn is_static_initializer(&self) -> bool {
        self.method_name == "<clinit>"
    }

    /// `name` + `descriptor`, the key used for override matching.
    pub fn signature(&self) -> (&str, &str) {
        (&self.method_name, &self.descriptor)
    }
}

/// Renders as `class.name(descriptor)`, e.g. `java/io/File.exists()Z`.
impl fmt::Display for MethodRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}{}", self.class_name, self.method_name, self.descriptor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MethodRefError {
    #[error("empty class or method name")]
    EmptyName,
    #[error("malformed method descriptor `{0}`")]
    BadDescriptor(String),
    #[error("expected `class.name(descriptor)`, got `{0}`")]
    BadSyntax(String),
}

impl FromStr for MethodRef {
    type Err = MethodRefError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let paren = s.find('(').ok_or_else(|| MethodRefError::BadSyntax(s.to_string()))?;
        let (head, desc) = s.split_at(paren);
        // binary class names never contain '.', so the last one splits class from method
        let dot = head.rfind('.').ok_or_else(|| MethodRefError::BadSyntax(s.to_string()))?;
        MethodRef::new(&head[..dot], &head[dot + 1..], desc)
    }
}

/// JVM method access flags plus the `Synthetic` attribute folded into
/// [`MethodFlags::SYNTHETIC`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct MethodFlags(pub u16);

impl MethodFlags {
    pub const PUBLIC: u16 = 0x0001;
    pub const PRIVATE: u16 = 0x0002;
    pub const PROTECTED: u16 = 0x0004;
    pub const STATIC: u16 = 0x0008;
    pub const FINAL: u16 = 0x0010;
    pub const SYNCHRONIZED: u16 = 0x0020;
    pub const BRIDGE: u16 = 0x0040;
    pub const VARARGS: u16 = 0x0080;
    pub const NATIVE: u16 = 0x0100;
    pub const ABSTRACT: u16 = 0x0400;
    pub const STRICT: u16 = 0x0800;
    pub const SYNTHETIC: u16 = 0x1000;

    pub fn contains(self, bits: u16) -> bool {
        self.0 & bits == bits
    }
    pub fn is_native(self) -> bool {
        self.contains(Self::NATIVE)
    }
    pub fn is_synthetic(self) -> bool {
        self.contains(Self::SYNTHETIC)
    }
    pub fn is_abstract(self) -> bool {
        self.contains(Self::ABSTRACT)
    }
    pub fn is_static(self) -> bool {
        self.contains(Self::STATIC)
    }
    pub fn is_bridge(self) -> bool {
        self.contains(Self::BRIDGE)
    }
    pub fn is_public(self) -> bool {
        self.contains(Self::PUBLIC)
    }
    pub fn is_private(self) -> bool {
        self.contains(Self::PRIVATE)
    }
    pub fn is_varargs(self) -> bool {
        self.contains(Self::VARARGS)
    }
}

/// Class access flags relevant to analysis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ClassFlags(pub u16);

impl ClassFlags {
    pub const PUBLIC: u16 = 0x0001;
    pub const INTERFACE: u16 = 0x0200;
    pub const ABSTRACT: u16 = 0x0400;
    pub const SYNTHETIC: u16 = 0x1000;
    pub const MODULE: u16 = 0x8000;

    pub fn is_interface(self) -> bool {
        self.0 & Self::INTERFACE != 0
    }
    pub fn is_abstract(self) -> bool {
        self.0 & Self::ABSTRACT != 0
    }
    pub fn is_synthetic(self) -> bool {
        self.0 & Self::SYNTHETIC != 0
    }
    pub fn is_module(self) -> bool {
        self.0 & Self::MODULE != 0
    }
}

/// Which part of the whole program a class came from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    #[default]
    Project,
    Dependency,
    Runtime,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Project => "project",
            Origin::Dependency => "dependency",
            Origin::Runtime => "runtime",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CallKind {
    Virtual,
    Special,
    Static,
    Interface,
    Dynamic,
}

impl CallKind {
    pub fn from_opcode(op: u8) -> Option<Self> {
        Some(match op {
            0xb6 => CallKind::Virtual,
            0xb7 => CallKind::Special,
            0xb8 => CallKind::Static,
            0xb9 => CallKind::Interface,
            0xba => CallKind::Dynamic,
            _ => return None,
        })
    }
}

/// One invocation instruction. For [`CallKind::Dynamic`] the target class
/// is [`DYNAMIC_CLASS`] and name/descriptor are the call site's declared ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CallSite {
    pub kind: CallKind,
    pub target: MethodRef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodModel {
    pub method: MethodRef,
    pub flags: MethodFlags,
    pub origin: Origin,
    pub call_sites: Vec<CallSite>,
    /// Classes named by `new` instructions in the body, in code order.
    pub new_types: Vec<String>,
    /// Byte length of the `Code` attribute's code array; 0 when absent.
    pub code_size_bytes: u32,
    /// Approximate statement count; see [`crate::classfile`] for the counted families.
    pub statement_units: u32,
    pub instruction_count: u32,
    /// Annotation type names (binary form), visible and invisible.
    pub annotations: Vec<String>,
}

impl MethodModel {
    pub fn has_annotation(&self, binary_name: &str) -> bool {
        self.annotations.iter().any(|a| a == binary_name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassModel {
    pub name: String,
    pub super_name: Option<String>,
    pub interfaces: Vec<String>,
    pub methods: Vec<MethodModel>,
    pub flags: ClassFlags,
    pub origin: Origin,
    pub major_version: u16,
    /// Module name: declared by `module-info`, or assigned by the container scanner.
    pub module: Option<String>,
    /// Every other class named by the constant pool (array types reduced to
    /// their element class), sorted and deduplicated.
    pub referenced_classes: Vec<String>,
}

impl ClassModel {
    /// Re-tags the class and all of its methods with `origin`.
    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        for m in &mut self.methods {
            m.origin = origin;
        }
        self
    }

    pub fn find_method(&self, name: &str, descriptor: &str) -> Option<&MethodModel> {
        self.methods
            .iter()
            .find(|m| m.method.method_name == name && m.method.descriptor == descriptor)
    }

    /// Annotation type names on the given method, if it is declared here.
    pub fn annotations_of(&self, method: &MethodRef) -> Option<&[String]> {
        self.methods
            .iter()
            .find(|m| &m.method == method)
            .map(|m| m.annotations.as_slice())
    }

    pub fn is_module_info(&self) -> bool {
        self.flags.is_module()
    }
}
