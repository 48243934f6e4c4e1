#!/usr/bin/env python3
"""Generate high-precision reference values for H_n^(1)(z) and its derivative.

Values are computed with mpmath at 60 significant digits and written as CSV
(n, re_z, im_z, re_h, im_h, re_dh, im_dh) to crates/core/tests/data/.
The derivative column uses the recurrence H_n' = H_{n-1} - (n/z) H_n
(exact identity), with H'_0 = -H_1.
"""

import mpmath as mp

mp.mp.dps = 60

ORDERS = [0, 1, 2, 3, 5, 8, 13, 21, 34, 50]
REAL_ARGS = [0.5, 1.0, 2.5, 4.0, 7.5, 11.0, 12.0, 12.5, 16.0, 25.0, 50.0, 100.0, 200.0]
COMPLEX_ARGS = [
    (0.5, 0.5),
    (2.0, 1.0),
    (4.0, 2.9),
    (8.0, 3.1),
    (11.5, 2.0),
    (12.5, 3.5),
    (3.5, 6.0),
    (0.5, 12.0),
    (6.0, 11.0),
    (20.0, 10.0),
    (50.0, 25.0),
    (3.0, 50.0),
    (120.0, 50.0),
    (180.0, 35.0),
    (450.0, 20.0),
    (300.0, 95.0),
]
# large-order spot checks beyond the main grid
EXTRA = [
    (120, 2.0, 0.0),
    (200, 15.0, 0.0),
    (200, 60.0, 1.5),
    (120, 30.0, 20.0),
    (80, 5.0, 4.0),
]


def hankel_pair(n, z):
    # J + iY cancels ~e^{2 Im z}; raise the working precision to absorb it
    mp.mp.dps = 60 + int(0.9 * abs(z.imag)) + 10
    h = mp.hankel1(n, z)
    if n == 0:
        dh = -mp.hankel1(1, z)
    else:
        dh = mp.hankel1(n - 1, z) - n / z * h
    mp.mp.dps = 60
    return h, dh


def emit(rows, n, x, y):
    z = mp.mpc(x, y)
    h, dh = hankel_pair(n, z)
    if max(abs(h), abs(dh)) > mp.mpf("1e280"):
        return
    rows.append(
        "%d,%s,%s,%s,%s,%s,%s"
        % (
            n,
            mp.nstr(mp.mpf(x), 17),
            mp.nstr(mp.mpf(y), 17),
            mp.nstr(h.real, 18),
            mp.nstr(h.imag, 18),
            mp.nstr(dh.real, 18),
            mp.nstr(dh.imag, 18),
        )
    )


def main():
    rows = ["n,re_z,im_z,re_h,im_h,re_dh,im_dh"]
    for n in ORDERS:
        for x in REAL_ARGS:
            emit(rows, n, x, 0.0)
        for (x, y) in COMPLEX_ARGS:
            emit(rows, n, x, y)
    for (n, x, y) in EXTRA:
        emit(rows, n, x, y)
    out = "crates/core/tests/data/hankel_reference.csv"
    with open(out, "w") as f:
        f.write("\n".join(rows) + "\n")
    print("wrote %s (%d rows)" % (out, len(rows) - 1))


if __name__ == "__main__":
    main()
