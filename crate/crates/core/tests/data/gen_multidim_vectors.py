"""Writes multidim_vectors.txt: one block per line, `d y.. u.. m..`.

Independent of the Rust code: d = 2 uses Python complex numbers, d = 4 the
Hamilton product written out, d = 8 octonions as quaternion pairs with
(a, b)(c, d) = (ac - d*b, da + bc*).
"""

import math
import random


def qmul(p, q):
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return (
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


def qconj(p):
    return (p[0], -p[1], -p[2], -p[3])


def omul(x, y):
    a, b = tuple(x[:4]), tuple(x[4:])
    c, d = tuple(y[:4]), tuple(y[4:])
    first = [s - t for s, t in zip(qmul(a, c), qmul(qconj(d), b))]
    second = [s + t for s, t in zip(qmul(d, a), qmul(b, qconj(c)))]
    return first + second


def mul(x, y):
    d = len(x)
    if d == 1:
        return [x[0] * y[0]]
    if d == 2:
        z = complex(*x) * complex(*y)
        return [z.real, z.imag]
    if d == 4:
        return list(qmul(x, y))
    return omul(x, y)


def map_block(u, y):
    d = len(y)
    ny = math.sqrt(sum(v * v for v in y))
    y_inv = [y[0] / ny] + [-v / ny for v in y[1:]]
    return mul([v / math.sqrt(d) for v in u], y_inv)


def main():
    rng = random.Random(20240611)
    lines = []
    for d in (1, 2, 4, 8):
        for _ in range(25):
            y = [rng.gauss(0.0, 1.5) for _ in range(d)]
            u = [rng.choice((-1.0, 1.0)) for _ in range(d)]
            m = map_block(u, y)
            lines.append(" ".join([str(d)] + [repr(v) for v in y + u + m]))
    with open("multidim_vectors.txt", "w") as f:
        f.write("# d y[d] u[d] m[d]\n")
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
