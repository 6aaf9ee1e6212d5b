"""Standalone class-file reader used to describe fixture binaries.

Shares no code with classgen.py. `describe(bytes)` returns the facts that
manifest.json records per class file.

    python3 tools/fixtures/disasm.py path/to/Foo.class
"""

import json
import struct
import sys

# operand byte counts for fixed-length opcodes; switches and wide handled apart
_OPERANDS = {}
for _op in range(0x00, 0x10):
    _OPERANDS[_op] = 0
_OPERANDS.update({0x10: 1, 0x11: 2, 0x12: 1, 0x13: 2, 0x14: 2})
for _op in range(0x15, 0x1a):
    _OPERANDS[_op] = 1
for _op in range(0x1a, 0x36):
    _OPERANDS[_op] = 0
for _op in range(0x36, 0x3b):
    _OPERANDS[_op] = 1
for _op in range(0x3b, 0x84):
    _OPERANDS[_op] = 0
_OPERANDS[0x84] = 2
for _op in range(0x85, 0x99):
    _OPERANDS[_op] = 0
for _op in range(0x99, 0xa9):
    _OPERANDS[_op] = 2
_OPERANDS.update({0xa9: 1})
for _op in range(0xac, 0xb2):
    _OPERANDS[_op] = 0
for _op in range(0xb2, 0xb9):
    _OPERANDS[_op] = 2
_OPERANDS.update({0xb9: 4, 0xba: 4, 0xbb: 2, 0xbc: 1, 0xbd: 2, 0xbe: 0, 0xbf: 0, 0xc0: 2, 0xc1: 2,
                  0xc2: 0, 0xc3: 0, 0xc5: 3, 0xc6: 2, 0xc7: 2, 0xc8: 4, 0xc9: 4})

INVOKES = {0xb6: "invokevirtual", 0xb7: "invokespecial", 0xb8: "invokestatic",
           0xb9: "invokeinterface", 0xba: "invokedynamic"}

STORES = set(range(0x36, 0x4f)) | {0x84}
ARRAY_STORES = set(range(0x4f, 0x57))
OTHER_UNITS = {0xb5, 0xb3, 0xbf, 0xc2, 0xc3} | set(range(0xac, 0xb2)) | set(INVOKES)
UNIT_OPS = STORES | ARRAY_STORES | OTHER_UNITS


class Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise ValueError("truncated")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u1(self):
        return self.take(1)[0]

    def u2(self):
        return struct.unpack(">H", self.take(2))[0]

    def u4(self):
        return struct.unpack(">I", self.take(4))[0]


def _decode_mutf8(raw):
    # good enough for the fixtures: NUL is the only two-byte form they use
    return raw.replace(b"\xc0\x80", b"\x00").decode("utf-8", errors="surrogatepass")


def _read_pool(r):
    count = r.u2()
    pool = [None] * count
    i = 1
    while i < count:
        tag = r.u1()
        if tag == 1:
            pool[i] = ("utf8", _decode_mutf8(r.take(r.u2())))
        elif tag in (3, 4):
            pool[i] = ("num", r.take(4))
        elif tag in (5, 6):
            pool[i] = ("wide", r.take(8))
            i += 1
        elif tag in (7, 8, 16, 19, 20):
            pool[i] = ({7: "class", 8: "string", 16: "mtype", 19: "module", 20: "package"}[tag], r.u2())
        elif tag in (9, 10, 11, 12, 17, 18):
            pool[i] = ({9: "field", 10: "method", 11: "imethod", 12: "nat", 17: "dyn", 18: "indy"}[tag],
                       r.u2(), r.u2())
        elif tag == 15:
            pool[i] = ("mh", r.u1(), r.u2())
        else:
            raise ValueError(f"bad constant tag {tag}")
        i += 1
    return pool


def _utf8(pool, i):
    kind, value = pool[i]
    assert kind == "utf8"
    return value


def _class_name(pool, i):
    kind, name_idx = pool[i]
    assert kind == "class"
    return _utf8(pool, name_idx)


def _walk_code(code):
    invokes = {}
    instructions = 0
    units = 0
    pc = 0
    while pc < len(code):
        op = code[pc]
        if op == 0xaa:
            pad = (4 - (pc + 1) % 4) % 4
            low, high = struct.unpack(">ii", code[pc + 1 + pad + 4:pc + 1 + pad + 12])
            length = 1 + pad + 12 + 4 * (high - low + 1)
        elif op == 0xab:
            pad = (4 - (pc + 1) % 4) % 4
            (npairs,) = struct.unpack(">i", code[pc + 1 + pad + 4:pc + 1 + pad + 8])
            length = 1 + pad + 8 + 8 * npairs
        elif op == 0xc4:
            length = 6 if code[pc + 1] == 0x84 else 4
        else:
            length = 1 + _OPERANDS[op]
        instructions += 1
        effective = code[pc + 1] if op == 0xc4 else op
        is_trailing_return = op == 0xb1 and pc + length == len(code)
        if effective in UNIT_OPS and not is_trailing_return:
            units += 1
        if op in INVOKES:
            invokes[INVOKES[op]] = invokes.get(INVOKES[op], 0) + 1
        pc += length
    return instructions, units, invokes


def describe(data):
    r = Reader(data)
    if r.u4() != 0xCAFEBABE:
        raise ValueError("bad magic")
    minor, major = r.u2(), r.u2()
    pool = _read_pool(r)
    access = r.u2()
    this = _class_name(pool, r.u2())
    super_idx = r.u2()
    interfaces = [_class_name(pool, r.u2()) for _ in range(r.u2())]
    for _ in range(r.u2()):  # fields
        r.take(6)
        for _ in range(r.u2()):
            r.u2()
            r.take(r.u4())
    methods = []
    for _ in range(r.u2()):
        flags = r.u2()
        name = _utf8(pool, r.u2())
        desc = _utf8(pool, r.u2())
        entry = {"name": name, "descriptor": desc, "access_flags": flags,
                 "native": bool(flags & 0x0100), "bridge": bool(flags & 0x0040),
                 "synthetic": bool(flags & 0x1000), "annotations": []}
        for _ in range(r.u2()):
            attr = _utf8(pool, r.u2())
            body = r.take(r.u4())
            if attr == "Code":
                (code_len,) = struct.unpack(">I", body[4:8])
                code = body[8:8 + code_len]
                entry["code_length"] = code_len
                entry["instructions"], entry["statement_units"], entry["invokes"] = _walk_code(code)
            elif attr == "Synthetic":
                entry["synthetic"] = True
            elif attr in ("RuntimeVisibleAnnotations", "RuntimeInvisibleAnnotations"):
                ar = Reader(body)
                for _ in range(ar.u2()):
                    type_desc = _utf8(pool, ar.u2())
                    if ar.u2() != 0:
                        raise ValueError("annotation elements are not described")
                    entry["annotations"].append(type_desc[1:-1])
        methods.append(entry)
    module = None
    for _ in range(r.u2()):
        attr = _utf8(pool, r.u2())
        body = r.take(r.u4())
        if attr == "Module":
            (mod_idx,) = struct.unpack(">H", body[:2])
            module = _utf8(pool, pool[mod_idx][1])
    out = {"version": [major, minor], "name": this, "access_flags": access,
           "super": _class_name(pool, super_idx) if super_idx else None,
           "interfaces": interfaces, "methods": methods}
    if module is not None:
        out["module"] = module
    return out


if __name__ == "__main__":
    for path in sys.argv[1:]:
        with open(path, "rb") as f:
            print(json.dumps(describe(f.read()), indent=1))
