"""Builds the fixture corpus under crates/ioscope/tests/fixtures.

    python3 tools/fixtures/build.py

Writes class files, JARs, the sample category database and manifest.json.
The manifest's `classes` section comes from disasm.py reading the written
bytes back; the `projects` section is the hand-written ground truth below.
"""

import io
import json
import os
import shutil
import sys
import zipfile

sys.path.insert(0, os.path.dirname(__file__))

from classgen import (  # noqa: E402
    ACC_ABSTRACT, ACC_ANNOTATION, ACC_BRIDGE, ACC_INTERFACE, ACC_NATIVE, ACC_PRIVATE, ACC_PUBLIC,
    ACC_STATIC, ACC_SUPER, ACC_SYNTHETIC, ACC_VARARGS, Class, Method, assemble, module_info,
)
import disasm  # noqa: E402

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", ".."))
OUT = os.path.join(ROOT, "crates", "ioscope", "tests", "fixtures")

PS = ACC_PUBLIC | ACC_STATIC
PSN = ACC_PUBLIC | ACC_STATIC | ACC_NATIVE
MAIN = "([Ljava/lang/String;)V"
OBJ = "java/lang/Object"
FIS = "java/io/FileInputStream"
REFLECT_INVOKE = "(Ljava/lang/Object;[Ljava/lang/Object;)Ljava/lang/Object;"
INVOKE0 = "(Ljava/lang/reflect/Method;Ljava/lang/Object;[Ljava/lang/Object;)Ljava/lang/Object;"
CONNECT0 = "(ZLjava/io/FileDescriptor;Ljava/net/InetAddress;I)I"
JUNIT5 = "org/junit/jupiter/api/Test"
JUNIT4 = "org/junit/Test"
FIXED_TIME = (2020, 1, 1, 0, 0, 0)


def init(super_name=OBJ):
    return Method("<init>", "()V", ACC_PUBLIC, [
        ("aload_0",), ("invokespecial", super_name, "<init>", "()V"), ("return",)])


def main(*code):
    return Method("main", MAIN, PS, list(code) + [("return",)])


def interface(name, *methods):
    return Class(name, flags=ACC_PUBLIC | ACC_INTERFACE | ACC_ABSTRACT,
                 methods=[Method(m, d, ACC_PUBLIC | ACC_ABSTRACT) for m, d in methods])


def annotation(name):
    return Class(name, flags=ACC_PUBLIC | ACC_INTERFACE | ACC_ABSTRACT | ACC_ANNOTATION,
                 interfaces=["java/lang/annotation/Annotation"])


# ---------------------------------------------------------------- runtime

RUNTIME = {
    "java.base": [
        Class(OBJ, super_name=None, methods=[
            Method("<init>", "()V", ACC_PUBLIC, [("return",)]),
            Method("hashCode", "()I", ACC_PUBLIC | ACC_NATIVE),
            Method("toString", "()Ljava/lang/String;", ACC_PUBLIC, [("aconst_null",), ("areturn",)]),
        ]),
        Class("java/lang/String", methods=[init()]),
        Class("java/lang/Class", methods=[
            Method("getMethod", "(Ljava/lang/String;[Ljava/lang/Class;)Ljava/lang/reflect/Method;",
                   ACC_PUBLIC | ACC_VARARGS, [("aconst_null",), ("areturn",)]),
        ]),
        Class("java/lang/System", methods=[
            Method("nanoTime", "()J", PSN),
            Method("currentTimeMillis", "()J", PSN),
            Method("arraycopy", "(Ljava/lang/Object;ILjava/lang/Object;II)V", PSN),
        ]),
        interface("java/lang/Comparable", ("compareTo", "(Ljava/lang/Object;)I")),
        interface("java/lang/Runnable", ("run", "()V")),
        interface("java/lang/annotation/Annotation"),
        Class("java/lang/ProcessHandleImpl", methods=[
            Method("getCurrentPid0", "()J", ACC_PRIVATE | ACC_STATIC | ACC_NATIVE),
        ]),
        Class("java/io/InputStream", flags=ACC_PUBLIC | ACC_SUPER | ACC_ABSTRACT, methods=[
            init(),
            Method("read", "()I", ACC_PUBLIC | ACC_ABSTRACT),
            Method("close", "()V", ACC_PUBLIC, [("return",)]),
        ]),
        Class(FIS, super_name="java/io/InputStream", methods=[
            Method("<init>", "(Ljava/lang/String;)V", ACC_PUBLIC, [
                ("aload_0",), ("invokespecial", "java/io/InputStream", "<init>", "()V"),
                ("aload_0",), ("aload_1",), ("invokespecial", FIS, "open", "(Ljava/lang/String;)V"),
                ("return",)]),
            Method("open", "(Ljava/lang/String;)V", ACC_PRIVATE, [
                ("aload_0",), ("aload_1",), ("invokespecial", FIS, "open0", "(Ljava/lang/String;)V"),
                ("return",)]),
            Method("open0", "(Ljava/lang/String;)V", ACC_PRIVATE | ACC_NATIVE),
            Method("read", "()I", ACC_PUBLIC, [
                ("aload_0",), ("invokespecial", FIS, "read0", "()I"), ("ireturn",)]),
            Method("read0", "()I", ACC_PRIVATE | ACC_NATIVE),
        ]),
        Class("java/io/FileDescriptor", methods=[init()]),
        Class("java/net/InetAddress", methods=[init()]),
        Class("java/net/Socket", methods=[
            Method("<init>", "(Ljava/lang/String;I)V", ACC_PUBLIC, [
                ("aload_0",), ("invokespecial", OBJ, "<init>", "()V"),
                ("iconst_1",), ("aconst_null",), ("aconst_null",), ("iconst_0",),
                ("invokestatic", "sun/nio/ch/Net", "connect0", CONNECT0),
                ("pop",), ("return",)]),
        ]),
        Class("sun/nio/ch/Net", methods=[
            Method("connect0", CONNECT0, ACC_STATIC | ACC_NATIVE),
        ]),
        Class("java/lang/reflect/Method", methods=[
            Method("invoke", REFLECT_INVOKE, ACC_PUBLIC | ACC_VARARGS, [
                ("aload_0",), ("aload_1",), ("aload_2",),
                ("invokestatic", "jdk/internal/reflect/NativeMethodAccessorImpl", "invoke0", INVOKE0),
                ("areturn",)]),
        ]),
        Class("jdk/internal/reflect/NativeMethodAccessorImpl", methods=[
            Method("invoke0", INVOKE0, ACC_PRIVATE | ACC_STATIC | ACC_NATIVE),
        ]),
        Class("java/lang/invoke/LambdaMetafactory", methods=[
            Method("metafactory",
                   "(Ljava/lang/invoke/MethodHandles$Lookup;Ljava/lang/String;Ljava/lang/invoke/MethodType;"
                   "Ljava/lang/invoke/MethodType;Ljava/lang/invoke/MethodHandle;Ljava/lang/invoke/MethodType;)"
                   "Ljava/lang/invoke/CallSite;", PS, [("aconst_null",), ("areturn",)]),
        ]),
    ],
    "jdk.unsupported": [
        Class("sun/misc/Unsafe", methods=[
            Method("getUnsafe", "()Lsun/misc/Unsafe;", PS, [("aconst_null",), ("areturn",)]),
        ]),
    ],
}

# ---------------------------------------------------------------- dependencies

DEPS = {
    "junit.jar": [
        Class("junit/framework/TestCase", flags=ACC_PUBLIC | ACC_SUPER | ACC_ABSTRACT, methods=[init()]),
        annotation(JUNIT4),
        annotation(JUNIT5),
    ],
    "util.jar": [
        Class("lib/Stopwatch", methods=[
            init(),
            Method("elapsed", "()J", PS, [
                ("invokestatic", "java/lang/System", "currentTimeMillis", "()J"), ("lreturn",)]),
        ]),
    ],
}

# ---------------------------------------------------------------- projects

PROJECTS = {
    "pure": [
        Class("pure/Main", methods=[
            init(),
            main(("iconst_1",), ("iconst_2",), ("invokestatic", "pure/Calc", "add", "(II)I"), ("istore_1",),
                 ("new", "pure/Calc"), ("dup",), ("invokespecial", "pure/Calc", "<init>", "()V"),
                 ("astore_2",), ("aload_2",), ("iload_1",),
                 ("invokevirtual", "pure/Calc", "twice", "(I)I"), ("pop",)),
        ]),
        Class("pure/Calc", methods=[
            init(),
            Method("add", "(II)I", PS, [("iload_0",), ("iload_1",), ("iadd",), ("ireturn",)]),
            Method("twice", "(I)I", ACC_PUBLIC, [("iload_1",), ("iload_1",), ("iadd",), ("ireturn",)]),
        ]),
    ],
    "time": [
        Class("time/Main", methods=[
            init(),
            main(("invokestatic", "time/Clock", "now", "()J"), ("pop2",)),
        ]),
        Class("time/Clock", methods=[
            init(),
            Method("<clinit>", "()V", ACC_STATIC, [
                ("invokestatic", "java/lang/System", "currentTimeMillis", "()J"), ("pop2",), ("return",)]),
            Method("now", "()J", PS, [("invokestatic", "java/lang/System", "nanoTime", "()J"), ("lreturn",)]),
        ]),
    ],
    "files": [
        Class("files/Main", methods=[
            main(("ldc", "data.txt"), ("invokestatic", "files/Reader", "firstByte", "(Ljava/lang/String;)I"),
                 ("pop",)),
        ]),
        Class("files/Reader", methods=[
            Method("firstByte", "(Ljava/lang/String;)I", PS, [
                ("new", FIS), ("dup",), ("aload_0",), ("invokespecial", FIS, "<init>", "(Ljava/lang/String;)V"),
                ("astore_1",),
                ("label", "try"),
                ("aload_1",), ("invokevirtual", "java/io/InputStream", "read", "()I"), ("istore_2",),
                ("label", "end"),
                ("aload_1",), ("invokevirtual", "java/io/InputStream", "close", "()V"),
                ("iload_2",), ("ireturn",),
                ("label", "handler"),
                ("aload_1",), ("invokevirtual", "java/io/InputStream", "close", "()V"),
                ("athrow",)],
                exceptions=[("try", "end", "handler", None)]),
        ]),
    ],
    "net": [
        Class("net/Main", methods=[main(("invokestatic", "net/Client", "ping", "()V"))]),
        Class("net/Client", methods=[
            Method("ping", "()V", PS, [
                ("new", "java/net/Socket"), ("dup",), ("ldc", "localhost"), ("bipush", 80),
                ("invokespecial", "java/net/Socket", "<init>", "(Ljava/lang/String;I)V"), ("pop",),
                ("return",)]),
        ]),
    ],
    "reflect": [
        Class("reflect/Main", methods=[
            main(("invokestatic", "reflect/Main", "viaReflection", "()V"),
                 ("invokestatic", "reflect/Main", "viaLambda", "()V")),
            Method("viaReflection", "()V", PS, [
                ("aconst_null",), ("ldc", "run"), ("aconst_null",),
                ("invokevirtual", "java/lang/Class", "getMethod",
                 "(Ljava/lang/String;[Ljava/lang/Class;)Ljava/lang/reflect/Method;"),
                ("aconst_null",), ("aconst_null",),
                ("invokevirtual", "java/lang/reflect/Method", "invoke", REFLECT_INVOKE),
                ("pop",), ("return",)]),
            Method("viaLambda", "()V", PS, [
                ("invokedynamic", "run", "()Ljava/lang/Runnable;", "reflect/Main", "lambda$viaLambda$0", "()V"),
                ("invokeinterface", "java/lang/Runnable", "run", "()V"),
                ("return",)]),
            Method("lambda$viaLambda$0", "()V", ACC_PRIVATE | ACC_STATIC | ACC_SYNTHETIC, [
                ("invokestatic", "java/lang/System", "nanoTime", "()J"), ("pop2",), ("return",)]),
        ]),
    ],
    "junit5": [
        Class("junit5/CalcTest", methods=[
            init(),
            Method("adds", "()V", ACC_PUBLIC, [
                ("invokestatic", "lib/Stopwatch", "elapsed", "()J"), ("pop2",), ("return",)],
                annotations=[JUNIT5]),
            Method("legacy", "()V", ACC_PUBLIC, [("return",)], annotations=[JUNIT4]),
        ]),
        Class("junit5/OldStyleTest", super_name="junit/framework/TestCase", methods=[
            init("junit/framework/TestCase"),
            Method("testSomething", "()V", ACC_PUBLIC, [("return",)]),
            Method("helper", "()V", ACC_PUBLIC, [("return",)]),
            Method("testStatic", "()V", PS, [("return",)]),
        ]),
    ],
    "custom": [
        Class("custom/Main", methods=[main(("invokestatic", "custom/Native", "compute", "()I"), ("pop",))]),
        Class("custom/Native", methods=[
            Method("compute", "()I", PSN),
        ]),
    ],
    "missing": [
        Class("missing/Main", methods=[
            main(("invokestatic", "com/absent/Lib", "run", "()V"), ("invokestatic", "missing/Main", "local", "()V")),
            Method("local", "()V", PS, [("return",)]),
        ]),
    ],
    "bridge": [
        Class("bridge/Box", interfaces=["java/lang/Comparable"], methods=[
            init(),
            Method("compareTo", "(Lbridge/Box;)I", ACC_PUBLIC, [
                ("invokestatic", "java/lang/System", "nanoTime", "()J"), ("pop2",), ("iconst_0",), ("ireturn",)]),
            Method("compareTo", "(Ljava/lang/Object;)I", ACC_PUBLIC | ACC_BRIDGE | ACC_SYNTHETIC, [
                ("aload_0",), ("aload_1",), ("checkcast", "bridge/Box"),
                ("invokevirtual", "bridge/Box", "compareTo", "(Lbridge/Box;)I"), ("ireturn",)]),
        ]),
        Class("bridge/Main", methods=[
            main(("new", "bridge/Box"), ("dup",), ("invokespecial", "bridge/Box", "<init>", "()V"), ("astore_1",),
                 ("aload_1",), ("aload_1",),
                 ("invokeinterface", "java/lang/Comparable", "compareTo", "(Ljava/lang/Object;)I"), ("pop",),
                 ("invokestatic", "bridge/Main", "access$000", "()V")),
            # synthetic through the attribute only, as older compilers emit it
            Method("access$000", "()V", ACC_STATIC, [("return",)], synthetic_attr=True),
        ]),
    ],
    "iface": [
        interface("iface/Task", ("run", "()V")),
        Class("iface/A", interfaces=["iface/Task"], methods=[
            init(),
            Method("run", "()V", ACC_PUBLIC, [
                ("invokestatic", "java/lang/System", "nanoTime", "()J"), ("pop2",), ("return",)]),
        ]),
        Class("iface/B", interfaces=["iface/Task"], methods=[
            init(),
            Method("run", "()V", ACC_PUBLIC, [
                ("new", FIS), ("dup",), ("ldc", "x"), ("invokespecial", FIS, "<init>", "(Ljava/lang/String;)V"),
                ("pop",), ("return",)]),
        ]),
        Class("iface/Main", methods=[
            main(("new", "iface/A"), ("dup",), ("invokespecial", "iface/A", "<init>", "()V"), ("astore_1",),
                 ("aload_1",), ("invokeinterface", "iface/Task", "run", "()V")),
        ]),
    ],
    "foreign": [
        Class("foreign/Main", methods=[
            main(("invokestatic", "sun/misc/Unsafe", "getUnsafe", "()Lsun/misc/Unsafe;"), ("pop",)),
        ]),
    ],
    "noentry": [
        Class("noentry/Lib", methods=[
            init(),
            Method("helper", "()V", PS, [("return",)]),
            # package-private, so not an entry point
            Method("main", MAIN, ACC_STATIC, [("return",)]),
        ]),
    ],
}

# Which dependency JARs each project is analyzed with.
PROJECT_DEPS = {"junit5": ["junit.jar", "util.jar"]}


# Hand-derived ground truth. Masks list categories in taxonomy order; source
# methods not listed have an empty mask. `reachable` lists reachable source
# methods.
EXPECT = {
    "pure": {
        "entry_points": [["pure/Main.main([Ljava/lang/String;)V", "main"]],
        "source_methods": 5,
        "cha": {
            "reachable": ["pure/Calc.<init>()V", "pure/Calc.add(II)I", "pure/Calc.twice(I)I",
                          "pure/Main.main([Ljava/lang/String;)V"],
            "masks": {},
            "edges": [
                ["pure/Calc.<init>()V", "java/lang/Object.<init>()V"],
                ["pure/Main.main([Ljava/lang/String;)V", "pure/Calc.<init>()V"],
                ["pure/Main.main([Ljava/lang/String;)V", "pure/Calc.add(II)I"],
                ["pure/Main.main([Ljava/lang/String;)V", "pure/Calc.twice(I)I"],
            ],
        },
        "lint": [],
    },
    "time": {
        "entry_points": [["time/Main.main([Ljava/lang/String;)V", "main"]],
        "source_methods": 4,
        "cha": {
            "reachable": ["time/Clock.now()J", "time/Main.main([Ljava/lang/String;)V"],
            "masks": {"time/Clock.now()J": "time", "time/Main.main([Ljava/lang/String;)V": "time"},
            "edges": [
                ["time/Clock.now()J", "java/lang/System.nanoTime()J"],
                ["time/Main.main([Ljava/lang/String;)V", "time/Clock.now()J"],
            ],
        },
        "lint": [],
    },
    "files": {
        "entry_points": [["files/Main.main([Ljava/lang/String;)V", "main"]],
        "source_methods": 2,
        "cha": {
            "reachable": ["files/Main.main([Ljava/lang/String;)V", "files/Reader.firstByte(Ljava/lang/String;)I"],
            "masks": {"files/Main.main([Ljava/lang/String;)V": "files",
                      "files/Reader.firstByte(Ljava/lang/String;)I": "files"},
        },
        "lint": [],
    },
    "net": {
        "entry_points": [["net/Main.main([Ljava/lang/String;)V", "main"]],
        "source_methods": 2,
        "cha": {
            "reachable": ["net/Client.ping()V", "net/Main.main([Ljava/lang/String;)V"],
            "masks": {"net/Client.ping()V": "network", "net/Main.main([Ljava/lang/String;)V": "network"},
        },
        "lint": [],
    },
    "reflect": {
        "entry_points": [["reflect/Main.main([Ljava/lang/String;)V", "main"]],
        "source_methods": 3,
        "cha": {
            "reachable": ["reflect/Main.main([Ljava/lang/String;)V", "reflect/Main.viaLambda()V",
                          "reflect/Main.viaReflection()V"],
            "masks": {"reflect/Main.main([Ljava/lang/String;)V": "invocation",
                      "reflect/Main.viaLambda()V": "invocation",
                      "reflect/Main.viaReflection()V": "invocation"},
        },
        # no Method instance is ever allocated in bytecode, so RTA finds no
        # receiver for Method.invoke
        "rta": {
            "reachable": ["reflect/Main.main([Ljava/lang/String;)V", "reflect/Main.viaLambda()V",
                          "reflect/Main.viaReflection()V"],
            "masks": {"reflect/Main.main([Ljava/lang/String;)V": "invocation",
                      "reflect/Main.viaLambda()V": "invocation"},
        },
        "lint": [],
    },
    "junit5": {
        "entry_points": [["junit5/CalcTest.adds()V", "junit5"], ["junit5/CalcTest.legacy()V", "junit4"],
                         ["junit5/OldStyleTest.testSomething()V", "junit3"]],
        "source_methods": 7,
        "cha": {
            "reachable": ["junit5/CalcTest.adds()V", "junit5/CalcTest.legacy()V",
                          "junit5/OldStyleTest.testSomething()V"],
            "masks": {"junit5/CalcTest.adds()V": "time"},
        },
        "lint": [],
    },
    "custom": {
        "entry_points": [["custom/Main.main([Ljava/lang/String;)V", "main"]],
        "lint": [["E4", "custom/Native.compute()I"]],
        "uncatalogued_reachable": ["custom/Native.compute()I"],
    },
    "missing": {
        "entry_points": [["missing/Main.main([Ljava/lang/String;)V", "main"]],
        "source_methods": 2,
        "cha": {
            "reachable": ["missing/Main.local()V", "missing/Main.main([Ljava/lang/String;)V"],
            "masks": {},
        },
        "lint": [["E3", "com/absent/Lib"]],
    },
    "bridge": {
        "entry_points": [["bridge/Main.main([Ljava/lang/String;)V", "main"]],
        "source_methods": 3,
        "cha": {
            "reachable": ["bridge/Box.<init>()V", "bridge/Box.compareTo(Lbridge/Box;)I",
                          "bridge/Main.main([Ljava/lang/String;)V"],
            "masks": {"bridge/Box.compareTo(Lbridge/Box;)I": "time",
                      "bridge/Main.main([Ljava/lang/String;)V": "time"},
        },
        "lint": [],
    },
    "iface": {
        "entry_points": [["iface/Main.main([Ljava/lang/String;)V", "main"]],
        # Task.run is abstract but still declared in the project
        "source_methods": 6,
        "cha": {
            "reachable": ["iface/A.<init>()V", "iface/A.run()V", "iface/B.run()V",
                          "iface/Main.main([Ljava/lang/String;)V"],
            "masks": {"iface/A.run()V": "time", "iface/B.run()V": "files",
                      "iface/Main.main([Ljava/lang/String;)V": "time,files"},
            "edges": [
                ["iface/A.<init>()V", "java/lang/Object.<init>()V"],
                ["iface/A.run()V", "java/lang/System.nanoTime()J"],
                ["iface/B.run()V", "java/io/FileInputStream.<init>(Ljava/lang/String;)V"],
                ["iface/Main.main([Ljava/lang/String;)V", "iface/A.<init>()V"],
                ["iface/Main.main([Ljava/lang/String;)V", "iface/A.run()V"],
                ["iface/Main.main([Ljava/lang/String;)V", "iface/B.run()V"],
                ["java/io/FileInputStream.<init>(Ljava/lang/String;)V", "java/io/FileInputStream.open(Ljava/lang/String;)V"],
                ["java/io/FileInputStream.<init>(Ljava/lang/String;)V", "java/io/InputStream.<init>()V"],
                ["java/io/FileInputStream.open(Ljava/lang/String;)V", "java/io/FileInputStream.open0(Ljava/lang/String;)V"],
                ["java/io/InputStream.<init>()V", "java/lang/Object.<init>()V"],
            ],
        },
        "rta": {
            "reachable": ["iface/A.<init>()V", "iface/A.run()V", "iface/Main.main([Ljava/lang/String;)V"],
            "masks": {"iface/A.run()V": "time", "iface/Main.main([Ljava/lang/String;)V": "time"},
            "edges": [
                ["iface/A.<init>()V", "java/lang/Object.<init>()V"],
                ["iface/A.run()V", "java/lang/System.nanoTime()J"],
                ["iface/Main.main([Ljava/lang/String;)V", "iface/A.<init>()V"],
                ["iface/Main.main([Ljava/lang/String;)V", "iface/A.run()V"],
            ],
        },
        # statement units of reachable source methods under CHA, counted by hand:
        # main: invokespecial, astore_1, invokeinterface; A.<init>: invokespecial;
        # A.run: invokestatic; B.run: invokespecial
        "units": {"iface/Main.main([Ljava/lang/String;)V": 3, "iface/A.<init>()V": 1,
                  "iface/A.run()V": 1, "iface/B.run()V": 1},
        "lint": [],
    },
    "foreign": {
        "entry_points": [["foreign/Main.main([Ljava/lang/String;)V", "main"]],
        "source_methods": 1,
        "cha": {"reachable": ["foreign/Main.main([Ljava/lang/String;)V"], "masks": {}},
        "lint": [["E5", "jdk.unsupported"]],
    },
    "noentry": {
        "entry_points": [],
        "source_methods": 3,
        "cha": {"reachable": [], "masks": {}},
        "lint": [["I6", "entry-points"]],
    },
}

# "cha" expectations hold for RTA too unless a project lists "rta" itself.
for spec in EXPECT.values():
    if "cha" in spec and "rta" not in spec:
        spec["rta"] = {k: v for k, v in spec["cha"].items()}

SAMPLE_DB = [
    ("java/lang/Object", "hashCode", "()I", "non-io"),
    ("java/lang/System", "arraycopy", "(Ljava/lang/Object;ILjava/lang/Object;II)V", "non-io"),
    ("java/util/zip/CRC32", "update", "(II)I", "non-io"),
    ("jdk/internal/reflect/NativeMethodAccessorImpl", "invoke0", INVOKE0, "invocation"),
    ("jdk/internal/reflect/NativeConstructorAccessorImpl", "newInstance0",
     "(Ljava/lang/reflect/Constructor;[Ljava/lang/Object;)Ljava/lang/Object;", "invocation"),
    ("sun/awt/X11/XlibWrapper", "XBell", "(JI)V", "desktop"),
    ("java/lang/System", "nanoTime", "()J", "time"),
    ("java/lang/System", "currentTimeMillis", "()J", "time"),
    ("java/io/FileInputStream", "open0", "(Ljava/lang/String;)V", "files"),
    ("java/io/FileInputStream", "read0", "()I", "files"),
    ("java/io/FileOutputStream", "writeBytes", "([BIIZ)V", "files"),
    ("sun/nio/ch/Net", "connect0", CONNECT0, "network"),
    ("java/lang/ProcessHandleImpl", "getCurrentPid0", "()J", "os"),
]


MAIN_REF = "main " + MAIN
TRACE = """\
# Synthetic execution trace over the time, files, reflect, bridge and iface
# projects. Threads 1 and 2 interleave.
E 1 java/lang/Object <init> ()V
E 1 time/Main {main}
E 1 time/Clock <clinit> ()V
E 2 files/Main {main}
E 1 time/Clock now ()J
N 1 3
F java/lang/System nanoTime ()J
F time/Clock now ()J
F time/Main {main}
E 2 files/Reader firstByte (Ljava/lang/String;)I
N 2 5
F java/io/FileInputStream open0 (Ljava/lang/String;)V
F java/io/FileInputStream open (Ljava/lang/String;)V
F java/io/FileInputStream <init> (Ljava/lang/String;)V
F files/Reader firstByte (Ljava/lang/String;)I
F files/Main {main}
N 1 3
F java/lang/System currentTimeMillis ()J
F time/Clock <clinit> ()V
F time/Main {main}
# the same sample twice
N 1 3
F java/lang/System nanoTime ()J
F time/Clock now ()J
F time/Main {main}
N 2 4
F java/io/FileInputStream read0 ()I
F java/io/FileInputStream read ()I
F files/Reader firstByte (Ljava/lang/String;)I
F files/Main {main}
E 1 reflect/Main {main}
E 2 bridge/Main {main}
E 1 reflect/Main viaReflection ()V
E 2 bridge/Box <init> ()V
N 1 4
F jdk/internal/reflect/NativeMethodAccessorImpl invoke0 {invoke0}
F java/lang/reflect/Method invoke {invoke}
F reflect/Main viaReflection ()V
F reflect/Main {main}
N 2 2
F java/lang/Object hashCode ()I
F bridge/Main {main}
E 1 reflect/Main viaLambda ()V
E 1 reflect/Main lambda$viaLambda$0 ()V
E 2 bridge/Box compareTo (Ljava/lang/Object;)I
N 1 4
F java/lang/System nanoTime ()J
F reflect/Main lambda$viaLambda$0 ()V
F reflect/Main viaLambda ()V
F reflect/Main {main}
E 2 bridge/Box compareTo (Lbridge/Box;)I
N 2 4
F java/lang/System nanoTime ()J
F bridge/Box compareTo (Lbridge/Box;)I
F bridge/Box compareTo (Ljava/lang/Object;)I
F bridge/Main {main}
E 2 bridge/Main access$000 ()V
E 1 iface/Task run ()V
N 1 2
F java/lang/System nanoTime ()J
F ghost/Unknown run ()V
""".format(main=MAIN_REF, invoke0=INVOKE0, invoke=REFLECT_INVOKE)

TRACE_PROJECTS = ["time", "files", "reflect", "bridge", "iface"]

# Executed methods and their masks, worked out by hand from TRACE.
TRACE_EXPECTED = {
    "time/Main.main([Ljava/lang/String;)V": "time",
    "time/Clock.now()J": "time",
    "files/Main.main([Ljava/lang/String;)V": "files",
    "files/Reader.firstByte(Ljava/lang/String;)I": "files",
    "reflect/Main.main([Ljava/lang/String;)V": "invocation,time",
    "reflect/Main.viaReflection()V": "invocation",
    "reflect/Main.viaLambda()V": "time",
    "bridge/Main.main([Ljava/lang/String;)V": "non-io,time",
    "bridge/Box.compareTo(Lbridge/Box;)I": "time",
    "bridge/Box.<init>()V": "",
}


def trace_expectations(classes):
    """Summary for TRACE; byte sizes come from the disassembled fixtures."""
    sizes = {}
    for path, desc in classes.items():
        if path.startswith("projects/"):
            for me in desc["methods"]:
                sizes[f"{desc['name']}.{me['name']}{me['descriptor']}"] = me.get("code_length", 0)
    io = {m for m, mask in TRACE_EXPECTED.items()
          if set(filter(None, mask.split(","))) - {"non-io", "invocation"}}
    cats = ["non-io", "invocation", "desktop", "time", "files", "network", "os"]
    per = {c: sum(c in mask.split(",") for mask in TRACE_EXPECTED.values()) for c in cats}
    over = [m for m in TRACE_EXPECTED if sizes[m] >= 11]
    return {
        "executed": TRACE_EXPECTED,
        "unknown": ["ghost/Unknown.run()V"],
        "calls_native": sum(bool(v) for v in TRACE_EXPECTED.values()),
        "calls_io": len(io),
        "categories": per,
        "code_length": {m: sizes[m] for m in TRACE_EXPECTED},
        "size_threshold": {"metric": "bytecode_bytes", "threshold": 11, "population": len(over),
                           "calls_io": sum(m in io for m in over)},
    }


def write(path, data):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "wb") as f:
        f.write(data)


def write_jar(path, members):
    """members: list of (name, bytes); written in the given order."""
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as z:
        for name, data in members:
            info = zipfile.ZipInfo(name, date_time=FIXED_TIME)
            info.compress_type = zipfile.ZIP_DEFLATED
            info.external_attr = 0o644 << 16
            z.writestr(info, data)
    write(path, buf.getvalue())


def class_path(c):
    return c.name + ".class"


def build_containers():
    base = os.path.join(OUT, "containers")
    three = [Class("a/One", methods=[init()]), Class("a/Two", methods=[init()]),
             Class("a/b/Three", methods=[init()])]
    for c in three:
        write(os.path.join(base, "three", class_path(c)), assemble(c))
    write(os.path.join(base, "three", "readme.txt"), b"not a class\n")

    write_jar(os.path.join(base, "one.jar"), [
        ("META-INF/MANIFEST.MF", b"Manifest-Version: 1.0\r\n\r\n"),
        ("c/Only.class", assemble(Class("c/Only", methods=[init()]))),
        ("data/config.properties", b"k=v\n"),
    ])

    members = [("META-INF/MANIFEST.MF", b"Manifest-Version: 1.0\r\n\r\n")]
    for i in range(1, 6):
        data = assemble(Class(f"k/C{i}", methods=[init()]))
        if i == 3:
            data = data[: len(data) // 2]
        members.append((f"k/C{i}.class", data))
    members.append(("META-INF/versions/11/k/C1.class", assemble(Class("k/C1", methods=[init()]))))
    inner = io.BytesIO()
    with zipfile.ZipFile(inner, "w") as z:
        z.writestr(zipfile.ZipInfo("n/Nested.class", date_time=FIXED_TIME),
                   assemble(Class("n/Nested", methods=[init()])))
    members.append(("lib/inner.jar", inner.getvalue()))
    write_jar(os.path.join(base, "corrupt.jar"), members)

    write_jar(os.path.join(base, "modular.jar"), [
        ("module-info.class", assemble(module_info("demo.mod"))),
        ("m/Thing.class", assemble(Class("m/Thing", methods=[init()]))),
    ])

    # one public and one private native declaration
    write(os.path.join(base, "twonatives", "n/Pair.class"), assemble(Class("n/Pair", methods=[
        init(),
        Method("open", "(Ljava/lang/String;)I", PSN),
        Method("close0", "(I)V", ACC_PRIVATE | ACC_STATIC | ACC_NATIVE),
    ])))

    # a directory holding a class, a JAR and a too-new class file
    mixed = os.path.join(base, "mixed")
    write(os.path.join(mixed, "z/Last.class"), assemble(Class("z/Last", methods=[init()])))
    newer = bytearray(assemble(Class("z/Newer", methods=[init()])))
    newer[6:8] = (62).to_bytes(2, "big")
    write(os.path.join(mixed, "z/Newer.class"), bytes(newer))
    write_jar(os.path.join(mixed, "lib/dep.jar"), [("d/Dep.class", assemble(Class("d/Dep", methods=[init()])))])


def main_():
    if os.path.exists(OUT):
        for sub in ("runtime", "deps", "projects", "containers", "db", "traces"):
            shutil.rmtree(os.path.join(OUT, sub), ignore_errors=True)
    written = []  # (relative path, bytes) of every class file

    for module, classes in RUNTIME.items():
        d = os.path.join(OUT, "runtime", module)
        data = assemble(module_info(module))
        write(os.path.join(d, "module-info.class"), data)
        written.append((f"runtime/{module}/module-info.class", data))
        for c in classes:
            data = assemble(c)
            write(os.path.join(d, class_path(c)), data)
            written.append((f"runtime/{module}/{class_path(c)}", data))

    for jar, classes in DEPS.items():
        members = [(class_path(c), assemble(c)) for c in classes]
        write_jar(os.path.join(OUT, "deps", jar), members)
        written.extend((f"deps/{jar}!/{n}", d) for n, d in members)

    for name, classes in PROJECTS.items():
        for c in classes:
            data = assemble(c)
            write(os.path.join(OUT, "projects", name, class_path(c)), data)
            written.append((f"projects/{name}/{class_path(c)}", data))

    build_containers()

    lines = ["# Sample native-method category database for the fixture runtime.",
             "# runtime: fixture mini-runtime (java.base, jdk.unsupported)",
             "# source: hand-assigned, following the seven-category taxonomy"]
    lines += ["\t".join(r) for r in SAMPLE_DB]
    write(os.path.join(OUT, "db", "sample.tsv"), ("\n".join(lines) + "\n").encode())

    os.makedirs(os.path.join(OUT, "traces"), exist_ok=True)
    with open(os.path.join(OUT, "traces", "synthetic.trace"), "w") as f:
        f.write(TRACE)

    counts = {}
    for *_, cat in SAMPLE_DB:
        counts[cat] = counts.get(cat, 0) + 1

    manifest = {
        "schema": 1,
        "description": "Fixture corpus: disassembled class facts plus hand-derived analysis expectations.",
        "classes": {path: disasm.describe(data) for path, data in sorted(written)},
        "runtime": [f"runtime/{m}" for m in RUNTIME],
        "deps": {name: [f"deps/{j}" for j in jars] for name, jars in PROJECT_DEPS.items()},
        "projects": {name: dict(EXPECT[name], path=f"projects/{name}") for name in PROJECTS},
        "containers": {
            "containers/three": {"classes": 3, "errors": []},
            "containers/one.jar": {"classes": 1, "errors": []},
            "containers/corrupt.jar": {"classes": 4, "errors": ["k/C3.class"]},
            "containers/modular.jar": {"classes": 2, "errors": [], "modules": {"m/Thing": "demo.mod"}},
            "containers/twonatives": {"classes": 1, "errors": [],
                                       "natives": ["n/Pair.close0(I)V", "n/Pair.open(Ljava/lang/String;)I"]},
            "containers/mixed": {"classes": 2, "errors": ["z/Newer.class"]},
        },
        "traces": {"traces/synthetic.trace": dict(projects=TRACE_PROJECTS)},
        "db": {"path": "db/sample.tsv", "counts": counts, "total": len(SAMPLE_DB)},
    }
    manifest["traces"]["traces/synthetic.trace"].update(trace_expectations(manifest["classes"]))
    with open(os.path.join(OUT, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)
        f.write("\n")
    print(f"wrote {len(written)} class files and manifest.json to {OUT}")


if __name__ == "__main__":
    main_()
