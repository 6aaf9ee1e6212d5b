"""Minimal JVM class-file assembler used to build the test fixtures.

Only what the fixtures need: constant pool, fields-free classes, methods
with Code, annotations, Synthetic, BootstrapMethods and Module attributes.
Stack and local sizes are generous constants; nothing here is verified by
a JVM, only by the analyzer and the disassembler.
"""

import struct

ACC_PUBLIC = 0x0001
ACC_PRIVATE = 0x0002
ACC_STATIC = 0x0008
ACC_FINAL = 0x0010
ACC_SUPER = 0x0020
ACC_BRIDGE = 0x0040
ACC_VARARGS = 0x0080
ACC_NATIVE = 0x0100
ACC_INTERFACE = 0x0200
ACC_ABSTRACT = 0x0400
ACC_SYNTHETIC = 0x1000
ACC_ANNOTATION = 0x2000
ACC_MODULE = 0x8000

MAJOR = 61

# name -> (opcode, operand kind)
OPS = {
    "nop": (0x00, None),
    "aconst_null": (0x01, None),
    "iconst_0": (0x03, None),
    "iconst_1": (0x04, None),
    "iconst_2": (0x05, None),
    "lconst_0": (0x09, None),
    "bipush": (0x10, "s1"),
    "sipush": (0x11, "s2"),
    "ldc": (0x12, "cp1"),
    "iload_0": (0x1a, None),
    "iload_1": (0x1b, None),
    "iload_2": (0x1c, None),
    "lload_0": (0x1e, None),
    "aload_0": (0x2a, None),
    "aload_1": (0x2b, None),
    "aload_2": (0x2c, None),
    "istore_1": (0x3c, None),
    "istore_2": (0x3d, None),
    "lstore_1": (0x40, None),
    "astore_1": (0x4c, None),
    "astore_2": (0x4d, None),
    "iastore": (0x4f, None),
    "pop": (0x57, None),
    "pop2": (0x58, None),
    "dup": (0x59, None),
    "iadd": (0x60, None),
    "ladd": (0x61, None),
    "imul": (0x68, None),
    "iinc": (0x84, "iinc"),
    "lcmp": (0x94, None),
    "ifeq": (0x99, "br"),
    "ifne": (0x9a, "br"),
    "goto": (0xa7, "br"),
    "ireturn": (0xac, None),
    "lreturn": (0xad, None),
    "areturn": (0xb0, None),
    "return": (0xb1, None),
    "getstatic": (0xb2, "field"),
    "putstatic": (0xb3, "field"),
    "getfield": (0xb4, "field"),
    "putfield": (0xb5, "field"),
    "invokevirtual": (0xb6, "method"),
    "invokespecial": (0xb7, "method"),
    "invokestatic": (0xb8, "method"),
    "invokeinterface": (0xb9, "imethod"),
    "invokedynamic": (0xba, "indy"),
    "new": (0xbb, "class"),
    "newarray": (0xbc, "u1"),
    "anewarray": (0xbd, "class"),
    "arraylength": (0xbe, None),
    "athrow": (0xbf, None),
    "checkcast": (0xc0, "class"),
    "monitorenter": (0xc2, None),
    "monitorexit": (0xc3, None),
}


def _u1(v):
    return struct.pack(">B", v)


def _u2(v):
    return struct.pack(">H", v)


def _u4(v):
    return struct.pack(">I", v)


def mutf8(s):
    out = bytearray()
    for ch in s:
        c = ord(ch)
        if c == 0:
            out += b"\xc0\x80"
        elif c < 0x80:
            out.append(c)
        elif c < 0x800:
            out += bytes([0xC0 | (c >> 6), 0x80 | (c & 0x3F)])
        elif c < 0x10000:
            out += bytes([0xE0 | (c >> 12), 0x80 | ((c >> 6) & 0x3F), 0x80 | (c & 0x3F)])
        else:
            c -= 0x10000
            for unit in (0xD800 | (c >> 10), 0xDC00 | (c & 0x3FF)):
                out += bytes([0xE0 | (unit >> 12), 0x80 | ((unit >> 6) & 0x3F), 0x80 | (unit & 0x3F)])
    return bytes(out)


class ConstantPool:
    def __init__(self):
        self.entries = []  # encoded entries; index = position + 1 (wide ones take 2)
        self.index = {}
        self.next = 1

    def _add(self, key, data, width=1):
        if key in self.index:
            return self.index[key]
        i = self.next
        self.index[key] = i
        self.entries.append(data)
        self.next += width
        return i

    def utf8(self, s):
        b = mutf8(s)
        return self._add(("utf8", s), _u1(1) + _u2(len(b)) + b)

    def integer(self, v):
        return self._add(("int", v), _u1(3) + struct.pack(">i", v))

    def long(self, v):
        return self._add(("long", v), _u1(5) + struct.pack(">q", v), width=2)

    def cls(self, name):
        return self._add(("class", name), _u1(7) + _u2(self.utf8(name)))

    def string(self, s):
        return self._add(("string", s), _u1(8) + _u2(self.utf8(s)))

    def nat(self, name, desc):
        return self._add(("nat", name, desc), _u1(12) + _u2(self.utf8(name)) + _u2(self.utf8(desc)))

    def field(self, owner, name, desc):
        return self._add(("field", owner, name, desc), _u1(9) + _u2(self.cls(owner)) + _u2(self.nat(name, desc)))

    def method(self, owner, name, desc):
        return self._add(("method", owner, name, desc), _u1(10) + _u2(self.cls(owner)) + _u2(self.nat(name, desc)))

    def imethod(self, owner, name, desc):
        return self._add(("imethod", owner, name, desc), _u1(11) + _u2(self.cls(owner)) + _u2(self.nat(name, desc)))

    def method_handle(self, kind, ref):
        return self._add(("mh", kind, ref), _u1(15) + _u1(kind) + _u2(ref))

    def method_type(self, desc):
        return self._add(("mt", desc), _u1(16) + _u2(self.utf8(desc)))

    def indy(self, bsm, name, desc):
        return self._add(("indy", bsm, name, desc), _u1(18) + _u2(bsm) + _u2(self.nat(name, desc)))

    def module(self, name):
        return self._add(("module", name), _u1(19) + _u2(self.utf8(name)))

    def encode(self):
        return _u2(self.next) + b"".join(self.entries)


class Method:
    def __init__(self, name, desc, flags, code=None, annotations=(), synthetic_attr=False,
                 exceptions=(), invisible_annotations=()):
        self.name = name
        self.desc = desc
        self.flags = flags
        self.code = code  # list of instruction tuples, or None
        self.annotations = list(annotations)
        self.invisible_annotations = list(invisible_annotations)
        self.synthetic_attr = synthetic_attr
        # (start_label, end_label, handler_label, catch_class or None)
        self.exceptions = list(exceptions)


class Class:
    def __init__(self, name, super_name="java/lang/Object", interfaces=(), flags=ACC_PUBLIC | ACC_SUPER,
                 methods=(), module=None, extra_constants=()):
        self.name = name
        self.super_name = super_name
        self.interfaces = list(interfaces)
        self.flags = flags
        self.methods = list(methods)
        self.module = module  # for module-info
        # (kind, *args) constants added to the pool without being used by code
        self.extra_constants = list(extra_constants)


LAMBDA_BSM = ("java/lang/invoke/LambdaMetafactory", "metafactory",
              "(Ljava/lang/invoke/MethodHandles$Lookup;Ljava/lang/String;Ljava/lang/invoke/MethodType;"
              "Ljava/lang/invoke/MethodType;Ljava/lang/invoke/MethodHandle;Ljava/lang/invoke/MethodType;)"
              "Ljava/lang/invoke/CallSite;")


def _assemble_code(cp, insns, bootstraps):
    """Two passes: sizes first (labels), then bytes."""
    labels = {}
    pc = 0
    for ins in insns:
        if ins[0] == "label":
            labels[ins[1]] = pc
            continue
        pc += _insn_size(ins)
    out = bytearray()
    for ins in insns:
        if ins[0] == "label":
            continue
        here = len(out)
        name = ins[0]
        op, kind = OPS[name]
        out.append(op)
        if kind is None:
            pass
        elif kind == "s1":
            out += struct.pack(">b", ins[1])
        elif kind == "u1":
            out += _u1(ins[1])
        elif kind == "s2":
            out += struct.pack(">h", ins[1])
        elif kind == "cp1":
            const = ins[1]
            idx = cp.string(const) if isinstance(const, str) else cp.integer(const)
            out += _u1(idx)
        elif kind == "iinc":
            out += _u1(ins[1]) + struct.pack(">b", ins[2])
        elif kind == "br":
            out += struct.pack(">h", labels[ins[1]] - here)
        elif kind == "field":
            out += _u2(cp.field(ins[1], ins[2], ins[3]))
        elif kind == "method":
            interface_owner = len(ins) > 4 and ins[4] == "interface"
            ref = cp.imethod(ins[1], ins[2], ins[3]) if interface_owner else cp.method(ins[1], ins[2], ins[3])
            out += _u2(ref)
        elif kind == "imethod":
            out += _u2(cp.imethod(ins[1], ins[2], ins[3])) + _u1(_arg_slots(ins[3]) + 1) + _u1(0)
        elif kind == "indy":
            # ("invokedynamic", name, desc, impl_owner, impl_name, impl_desc)
            bsm = cp.method_handle(6, cp.method(*LAMBDA_BSM))
            impl = cp.method_handle(6, cp.method(ins[3], ins[4], ins[5]))
            sam = cp.method_type(ins[6] if len(ins) > 6 else "()V")
            key = (bsm, sam, impl, sam)
            if key not in bootstraps:
                bootstraps.append(key)
            out += _u2(cp.indy(bootstraps.index(key), ins[1], ins[2])) + _u2(0)
        elif kind == "class":
            out += _u2(cp.cls(ins[1]))
        else:
            raise ValueError(kind)
        assert len(out) - here == _insn_size(ins), ins
    return bytes(out), labels


def _insn_size(ins):
    kind = OPS[ins[0]][1]
    return 1 + {None: 0, "s1": 1, "u1": 1, "s2": 2, "cp1": 1, "iinc": 2, "br": 2, "field": 2,
                "method": 2, "imethod": 4, "indy": 4, "class": 2}[kind]


def _arg_slots(desc):
    i, slots = 1, 0
    while desc[i] != ")":
        c = desc[i]
        if c in "JD":
            slots += 2
            i += 1
        elif c == "L":
            slots += 1
            i = desc.index(";", i) + 1
        elif c == "[":
            while desc[i] == "[":
                i += 1
            if desc[i] == "L":
                i = desc.index(";", i) + 1
            else:
                i += 1
            slots += 1
        else:
            slots += 1
            i += 1
    return slots


def _annotations_attr(cp, attr_name, annotations):
    body = _u2(len(annotations))
    for a in annotations:
        body += _u2(cp.utf8("L" + a + ";")) + _u2(0)
    return _u2(cp.utf8(attr_name)) + _u4(len(body)) + body


def assemble(c):
    cp = ConstantPool()
    this_idx = cp.cls(c.name)
    super_idx = cp.cls(c.super_name) if c.super_name else 0
    iface_idx = [cp.cls(i) for i in c.interfaces]
    for kind, *args in c.extra_constants:
        getattr(cp, kind)(*args)
    bootstraps = []

    methods = bytearray()
    for m in c.methods:
        attrs = []
        if m.code is not None:
            code, labels = _assemble_code(cp, m.code, bootstraps)
            exc = bytearray()
            for start, end, handler, catch in m.exceptions:
                exc += _u2(labels[start]) + _u2(labels[end]) + _u2(labels[handler])
                exc += _u2(cp.cls(catch) if catch else 0)
            max_locals = _arg_slots(m.desc) + (0 if m.flags & ACC_STATIC else 1) + 4
            body = _u2(8) + _u2(max_locals) + _u4(len(code)) + code
            body += _u2(len(m.exceptions)) + bytes(exc) + _u2(0)
            attrs.append(_u2(cp.utf8("Code")) + _u4(len(body)) + body)
        if m.synthetic_attr:
            attrs.append(_u2(cp.utf8("Synthetic")) + _u4(0))
        if m.annotations:
            attrs.append(_annotations_attr(cp, "RuntimeVisibleAnnotations", m.annotations))
        if m.invisible_annotations:
            attrs.append(_annotations_attr(cp, "RuntimeInvisibleAnnotations", m.invisible_annotations))
        methods += _u2(m.flags) + _u2(cp.utf8(m.name)) + _u2(cp.utf8(m.desc)) + _u2(len(attrs))
        methods += b"".join(attrs)

    class_attrs = []
    if bootstraps:
        body = _u2(len(bootstraps))
        for bsm, *args in bootstraps:
            body += _u2(bsm) + _u2(len(args)) + b"".join(_u2(a) for a in args)
        class_attrs.append(_u2(cp.utf8("BootstrapMethods")) + _u4(len(body)) + body)
    if c.module:
        body = _u2(cp.module(c.module)) + _u2(0) + _u2(0)
        body += _u2(0) + _u2(0) + _u2(0) + _u2(0) + _u2(0)  # requires, exports, opens, uses, provides
        class_attrs.append(_u2(cp.utf8("Module")) + _u4(len(body)) + body)

    out = _u4(0xCAFEBABE) + _u2(0) + _u2(MAJOR) + cp.encode()
    out += _u2(c.flags) + _u2(this_idx) + _u2(super_idx)
    out += _u2(len(iface_idx)) + b"".join(_u2(i) for i in iface_idx)
    out += _u2(0)  # fields
    out += _u2(len(c.methods)) + bytes(methods)
    out += _u2(len(class_attrs)) + b"".join(class_attrs)
    return out


def module_info(name):
    return Class("module-info", super_name=None, flags=ACC_MODULE, module=name)
