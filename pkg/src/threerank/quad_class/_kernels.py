"""Compiled kernels for class groups over many discriminants.

Same mathematics as ``forms``/``group`` (reduced forms, rho-cycles,
Dirichlet composition, Sylow torsion counts) in int64 arithmetic. Forms
are looked up by an integer key through a sorted array. Coefficients of
reduced forms are below |D|, so products stay far from overflow for the
discriminants handled here (|D| < 10^7).
"""

import os

os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

import numpy as np  # noqa: E402
from numba import njit, prange  # noqa: E402

MAX_FACTORS = 24
# row layout: h_narrow, h, unit norm (-1, +1, or 0 for D < 0), #factors, factors...
ROW = 4 + MAX_FACTORS


@njit(cache=True)
def _isqrt(n):
    r = np.int64(np.sqrt(np.float64(n)))
    while r * r > n:
        r -= 1
    while (r + 1) * (r + 1) <= n:
        r += 1
    return r


@njit(cache=True)
def _xgcd(a, b):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b != 0:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


@njit(cache=True)
def _compose(a1, b1, c1, a2, b2, c2, D):
    s = (b1 + b2) // 2
    n = b2 - s
    d1, u1, v1 = _xgcd(a1, a2)
    d, p, w = _xgcd(d1, s)
    v = p * v1
    A = a1 * a2 // (d * d)
    m = 2 * A
    t = (v * n + w * c2) % m
    B = (b2 - 2 * (a2 // d) * t) % m
    C = (B * B - D) // (4 * A)
    return A, B, C


@njit(cache=True)
def _reduce_def(a, b, c):
    while True:
        if not (-a < b <= a):
            r = (a - b) // (2 * a)
            c = a * r * r + b * r + c
            b = b + 2 * r * a
        if a > c or (a == c and b < 0):
            a, b, c = c, -b, a
        else:
            return a, b, c


@njit(cache=True)
def _normalize_indef(a, b, D, s):
    aa = abs(a)
    m = 2 * aa
    if aa > s:
        lo = -aa
    else:
        lo = s - m
    nb = b + m * ((lo - b) // m + 1)
    return a, nb, (nb * nb - D) // (4 * a)


@njit(cache=True)
def _is_reduced_indef(a, b, s):
    aa = abs(a)
    return 0 < b <= s and 2 * aa + b > s and 2 * aa - b <= s


@njit(cache=True)
def _reduce_indef(a, b, c, D, s):
    a, b, c = _normalize_indef(a, b, D, s)
    while not _is_reduced_indef(a, b, s):
        a, b, c = _normalize_indef(c, -b, D, s)
    return a, b, c


@njit(cache=True)
def _divisors(N, spf, buf):
    """Write the divisors of N into buf, return how many."""
    buf[0] = 1
    cnt = 1
    while N > 1:
        p = spf[N]
        e = 0
        while N % p == 0:
            N //= p
            e += 1
        base = cnt
        pk = 1
        for _ in range(e):
            pk *= p
            for i in range(base):
                buf[cnt] = buf[i] * pk
                cnt += 1
    return cnt


@njit(cache=True)
def _definite_forms(D, spf, buf, fill, fa, fb, fc):
    """Count (fill=False) or list (fill=True) reduced forms of D < 0."""
    aD = -D
    bmax = _isqrt(aD // 3)
    cnt = 0
    b = aD & 1
    while b <= bmax:
        N = (b * b + aD) // 4
        nd = _divisors(N, spf, buf)
        for i in range(nd):
            a = buf[i]
            if a < b or a * a > N:
                continue
            c = N // a
            if fill:
                fa[cnt] = a
                fb[cnt] = b
                fc[cnt] = c
            cnt += 1
            if b != 0 and a != b and a != c:
                if fill:
                    fa[cnt] = a
                    fb[cnt] = -b
                    fc[cnt] = c
                cnt += 1
        b += 2
    return cnt


@njit(cache=True)
def _indefinite_forms(D, s, spf, buf, fill, fa, fb, fc):
    cnt = 0
    b = 1 if (D & 1) else 2
    while b <= s:
        N = (D - b * b) // 4
        nd = _divisors(N, spf, buf)
        for i in range(nd):
            a = buf[i]
            if 2 * a + b > s and 2 * a - b <= s:
                if fill:
                    fa[cnt] = a
                    fb[cnt] = b
                    fc[cnt] = -(N // a)
                    fa[cnt + 1] = -a
                    fb[cnt + 1] = b
                    fc[cnt + 1] = N // a
                cnt += 2
        b += 2
    return cnt


@njit(cache=True)
def _lookup(keys, key):
    i = np.searchsorted(keys, key)
    if i < keys.shape[0] and keys[i] == key:
        return i
    return -1


@njit(cache=True)
def _factor_small(n, primes_out, exps_out):
    k = 0
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            primes_out[k] = p
            exps_out[k] = e
            k += 1
        p += 1
    if n > 1:
        primes_out[k] = n
        exps_out[k] = 1
        k += 1
    return k


@njit(cache=True)
def _class_mul(i, j, D, s, ra, rb, rc, keys, cls, K, off):
    if i == 0:
        return j
    if j == 0:
        return i
    a, b, c = _compose(ra[i], rb[i], rc[i], ra[j], rb[j], rc[j], D)
    if D < 0:
        a, b, c = _reduce_def(a, b, c)
        return cls[_lookup(keys, a * K + (b + off))]
    a, b, c = _reduce_indef(a, b, c, D, s)
    return cls[_lookup(keys, (a + off) * K + b)]


@njit(cache=True)
def _class_pow(x, n, D, s, ra, rb, rc, keys, cls, K, off):
    result = 0
    base = x
    while n > 0:
        if n & 1:
            result = _class_mul(result, base, D, s, ra, rb, rc, keys, cls, K, off)
        n >>= 1
        if n > 0:
            base = _class_mul(base, base, D, s, ra, rb, rc, keys, cls, K, off)
    return result


@njit(cache=True)
def class_group_row(D, spf, out):
    """Fill ``out`` (length ROW) with the class group data of fundamental D."""
    for i in range(out.shape[0]):
        out[i] = 0
    aD = abs(D)
    buf = np.empty(4096, dtype=np.int64)
    dummy = np.empty(1, dtype=np.int64)
    if D < 0:
        s = 0
        n = _definite_forms(D, spf, buf, False, dummy, dummy, dummy)
    else:
        s = _isqrt(D)
        n = _indefinite_forms(D, s, spf, buf, False, dummy, dummy, dummy)
    fa = np.empty(n, dtype=np.int64)
    fb = np.empty(n, dtype=np.int64)
    fc = np.empty(n, dtype=np.int64)
    if D < 0:
        _definite_forms(D, spf, buf, True, fa, fb, fc)
        off = _isqrt(aD // 3) + 1
        K = 2 * off + 1
        raw = fa * K + (fb + off)
    else:
        _indefinite_forms(D, s, spf, buf, True, fa, fb, fc)
        off = s
        K = s + 1
        raw = (fa + off) * K + fb
    order = np.argsort(raw)
    keys = raw[order]
    fa = fa[order]
    fb = fb[order]
    fc = fc[order]
    cls = np.full(n, -1, dtype=np.int64)

    # class representatives; class ids assigned in key order, principal fixed later
    ra = np.empty(n, dtype=np.int64)
    rb = np.empty(n, dtype=np.int64)
    rc = np.empty(n, dtype=np.int64)
    h = 0
    if D < 0:
        for i in range(n):
            cls[i] = i
            ra[i] = fa[i]
            rb[i] = fb[i]
            rc[i] = fc[i]
        h = n
    else:
        for i in range(n):
            if cls[i] != -1:
                continue
            ra[h] = fa[i]
            rb[h] = fb[i]
            rc[h] = fc[i]
            a, b, c = fa[i], fb[i], fc[i]
            j = i
            while cls[j] == -1:
                cls[j] = h
                a, b, c = _normalize_indef(c, -b, D, s)
                j = _lookup(keys, (a + off) * K + b)
            h += 1

    # move the principal class to id 0
    pb = D & 1
    pa, pb, pc = 1, pb, (pb * pb - D) // 4
    if D < 0:
        pa, pb, pc = _reduce_def(pa, pb, pc)
        one = cls[_lookup(keys, pa * K + (pb + off))]
    else:
        pa, pb, pc = _reduce_indef(pa, pb, pc, D, s)
        one = cls[_lookup(keys, (pa + off) * K + pb)]
    if one != 0:
        ra[0], ra[one] = ra[one], ra[0]
        rb[0], rb[one] = rb[one], rb[0]
        rc[0], rc[one] = rc[one], rc[0]
        for i in range(n):
            if cls[i] == one:
                cls[i] = 0
            elif cls[i] == 0:
                cls[i] = one

    out[0] = h
    out[1] = h
    if D > 0:
        na, nb, nc = _reduce_indef(-1, D & 1, -((D & 1) - D) // 4, D, s)
        if cls[_lookup(keys, (na + off) * K + nb)] == 0:
            out[2] = -1
        else:
            out[2] = 1
            out[1] = h // 2

    if h == 1:
        out[3] = 0
        return
    primes = np.empty(32, dtype=np.int64)
    exps = np.empty(32, dtype=np.int64)
    nprimes = _factor_small(h, primes, exps)
    # per prime, descending cyclic exponents
    lam = np.zeros((nprimes, MAX_FACTORS), dtype=np.int64)
    nlam = np.zeros(nprimes, dtype=np.int64)
    for t in range(nprimes):
        p = primes[t]
        e = exps[t]
        if e == 1:
            lam[t, 0] = 1
            nlam[t] = 1
            continue
        cof = h
        for _ in range(e):
            cof //= p
        levels = np.zeros(e + 1, dtype=np.int64)
        for x in range(h):
            y = _class_pow(x, cof, D, s, ra, rb, rc, keys, cls, K, off)
            k = 0
            while y != 0:
                y = _class_pow(y, p, D, s, ra, rb, rc, keys, cls, K, off)
                k += 1
            levels[k] += 1
        logs = np.zeros(e + 1, dtype=np.int64)
        running = 0
        for j in range(e + 1):
            running += levels[j]
            tsz = running // cof
            lg = 0
            while tsz > 1:
                tsz //= p
                lg += 1
            logs[j] = lg
        cntl = 0
        for j in range(e, 0, -1):
            at_least = logs[j] - logs[j - 1]
            nxt = logs[j + 1] - logs[j] if j < e else 0
            for _ in range(at_least - nxt):
                lam[t, cntl] = j
                cntl += 1
        nlam[t] = cntl
    r = 0
    for t in range(nprimes):
        if nlam[t] > r:
            r = nlam[t]
    out[3] = r
    # factor i (largest first) takes the i-th largest exponent of every prime
    for i in range(r):
        d = 1
        for t in range(nprimes):
            if i < nlam[t]:
                for _ in range(lam[t, i]):
                    d *= primes[t]
        out[4 + r - 1 - i] = d


@njit(parallel=True, cache=True)
def class_group_rows(discs, spf):
    rows = np.zeros((discs.shape[0], ROW), dtype=np.int64)
    for i in prange(discs.shape[0]):
        class_group_row(discs[i], spf, rows[i])
    return rows


@njit(cache=True)
def count_definite_forms(X):
    """counts[k] = number of reduced positive definite forms (a, b, c) with b^2 - 4ac = -k, k <= X.

    Imprimitive forms are included, so the count is h(-k) only for fundamental -k.
    """
    counts = np.zeros(X + 1, dtype=np.int64)
    amax = _isqrt(X // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            c = a
            while True:
                k = 4 * a * c - b * b
                if k > X:
                    break
                if not (c == a and b < 0):
                    counts[k] += 1
                c += 1
    return counts
