"""Arithmetic in GF(2^64) = GF(2)[x] / (x^64 + x^4 + x^3 + x + 1).

Elements are 64-bit words.  Addition is XOR.  Multiplication is a carryless
128-bit product followed by reduction; on x86 hosts with PCLMULQDQ the
product is a single instruction emitted through an LLVM intrinsic, elsewhere
a shift-and-xor loop is compiled instead.  The pure-Python ``mul_portable``
is kept as the bit-exact reference for both.

The njit-able kernels (``clmul``, ``reduce128``, ``gmul``, ``gpow``,
``ginv``) are imported by the sieve and matching code.
"""

from __future__ import annotations

import os

import numpy as np
from llvmlite import binding as llvm
from llvmlite import ir
from numba import njit, types
from numba.extending import intrinsic

ORDER = 1 << 64
MASK = ORDER - 1
# x^64 = x^4 + x^3 + x + 1 (mod the modulus)
REDUCTION = 0x1B
MODULUS = ORDER | REDUCTION


def _host_has_pclmul() -> bool:
    if os.environ.get("TREESIEVE_NO_PCLMUL"):
        return False
    try:
        features = llvm.get_host_cpu_features()
    except Exception:
        return False
    return bool(features.get("pclmul", False))


HAVE_PCLMUL = _host_has_pclmul()


# ---------------------------------------------------------------------------
# pure-Python reference


def add(a: int, b: int) -> int:
    return a ^ b


def clmul_portable(a: int, b: int) -> int:
    """Carryless product of two 64-bit words as a 128-bit int."""
    p = 0
    while b:
        if b & 1:
            p ^= a
        a <<= 1
        b >>= 1
    return p


def reduce_portable(p: int) -> int:
    hi = p >> 64
    while hi:
        p = (p & MASK) ^ hi ^ (hi << 1) ^ (hi << 3) ^ (hi << 4)
        hi = p >> 64
    return p


def mul_portable(a: int, b: int) -> int:
    return reduce_portable(clmul_portable(a & MASK, b & MASK))


# ---------------------------------------------------------------------------
# compiled kernels


@intrinsic
def _pclmul(typingctx, a, b):
    sig = types.UniTuple(types.uint64, 2)(types.uint64, types.uint64)

    def codegen(context, builder, signature, args):
        i32 = ir.IntType(32)
        i64 = ir.IntType(64)
        vt = ir.VectorType(i64, 2)
        zero64 = ir.Constant(i64, 0)
        va = builder.insert_element(ir.Constant(vt, ir.Undefined), args[0], ir.Constant(i32, 0))
        va = builder.insert_element(va, zero64, ir.Constant(i32, 1))
        vb = builder.insert_element(ir.Constant(vt, ir.Undefined), args[1], ir.Constant(i32, 0))
        vb = builder.insert_element(vb, zero64, ir.Constant(i32, 1))
        fnty = ir.FunctionType(vt, [vt, vt, ir.IntType(8)])
        fn = builder.module.declare_intrinsic("llvm.x86.pclmulqdq", fnty=fnty)
        res = builder.call(fn, [va, vb, ir.Constant(ir.IntType(8), 0)])
        lo = builder.extract_element(res, ir.Constant(i32, 0))
        hi = builder.extract_element(res, ir.Constant(i32, 1))
        return context.make_tuple(builder, signature.return_type, [lo, hi])

    return sig, codegen


@njit(cache=False, nogil=True)
def clmul_hw(a, b):
    return _pclmul(np.uint64(a), np.uint64(b))


@njit(cache=True, nogil=True)
def clmul_soft(a, b):
    a = np.uint64(a)
    b = np.uint64(b)
    lo = np.uint64(0)
    hi = np.uint64(0)
    one = np.uint64(1)
    for i in range(64):
        s = np.uint64(i)
        if (b >> s) & one:
            lo ^= a << s
            if i:
                hi ^= a >> np.uint64(64 - i)
    return lo, hi


clmul = clmul_hw if HAVE_PCLMUL else clmul_soft


@njit(cache=True, nogil=True)
def reduce128(lo, hi):
    h = np.uint64(hi)
    r = np.uint64(lo) ^ h ^ (h << np.uint64(1)) ^ (h << np.uint64(3)) ^ (h << np.uint64(4))
    o = (h >> np.uint64(63)) ^ (h >> np.uint64(61)) ^ (h >> np.uint64(60))
    return r ^ o ^ (o << np.uint64(1)) ^ (o << np.uint64(3)) ^ (o << np.uint64(4))


@njit(nogil=True)
def gmul(a, b):
    lo, hi = clmul(a, b)
    return reduce128(lo, hi)


@njit(nogil=True)
def gmul_soft(a, b):
    lo, hi = clmul_soft(a, b)
    return reduce128(lo, hi)


@njit(nogil=True)
def gpow(a, e):
    result = np.uint64(1)
    base = np.uint64(a)
    e = np.uint64(e)
    one = np.uint64(1)
    while e:
        if e & one:
            result = gmul(result, base)
        base = gmul(base, base)
        e >>= one
    return result


@njit(nogil=True)
def ginv(a):
    # a^(2^64 - 2); the caller guarantees a != 0
    return gpow(a, np.uint64(0xFFFFFFFFFFFFFFFE))


@njit(nogil=True)
def _mul_arrays(a, b, out):
    for i in range(a.shape[0]):
        out[i] = gmul(a[i], b[i])
    return out


# ---------------------------------------------------------------------------
# Python-facing API


def mul(a: int, b: int) -> int:
    return int(gmul(np.uint64(a & MASK), np.uint64(b & MASK)))


def power(a: int, e: int) -> int:
    if e < 0:
        return power(inv(a), -e)
    return int(gpow(np.uint64(a & MASK), np.uint64(e)))


def inv(a: int) -> int:
    if a & MASK == 0:
        raise ZeroDivisionError("zero has no inverse in GF(2^64)")
    return int(ginv(np.uint64(a & MASK)))


def mul_arrays(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.uint64).ravel()
    b = np.ascontiguousarray(b, dtype=np.uint64).ravel()
    if a.shape != b.shape:
        raise ValueError("shape mismatch")
    return _mul_arrays(a, b, np.empty_like(a))


def sample(rng: np.random.Generator, size=None):
    """Uniform element(s) of the field drawn from ``rng``."""
    if size is None:
        return int(rng.bit_generator.random_raw())
    return np.asarray(rng.bit_generator.random_raw(size), dtype=np.uint64)
