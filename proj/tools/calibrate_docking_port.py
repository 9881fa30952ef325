#!/usr/bin/env python3
"""Derive the chaser docking-port geometry (q_dp, p_dp) from a target
terminal pose.

The terminal pose follows from the port geometry as
    q_f = q_lock * conj(q_dp),    p_f = -R(q_f) p_dp,
with quaternions [x, y, z, w] mapping body to LVLH. Given q_lock and the
target terminal pose, the script fits q_dp as a pure rotation about the
body x axis (the docking axis), rounds the angle to whole degrees, and solves
for p_dp exactly. It prints the `docking:` block of config/apollo.yaml and
checks that the result reproduces the target to the given number of digits.

    python3 tools/calibrate_docking_port.py
    python3 tools/calibrate_docking_port.py --qf 0 0.26 0.97 0 --pf 4.48 -0.05 0.17 --digits 2
"""

import argparse
import math


def qmul(a, b):
    ax, ay, az, aw = a
    bx, by, bz, bw = b
    return (
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
        aw * bw - ax * bx - ay * by - az * bz,
    )


def qconj(q):
    return (-q[0], -q[1], -q[2], q[3])


def qnormalize(q):
    n = math.sqrt(sum(c * c for c in q))
    return tuple(c / n for c in q)


def rotate(q, u):
    v = qmul(qmul(q, (u[0], u[1], u[2], 0.0)), qconj(q))
    return v[:3]


def x_rotation(deg):
    h = math.radians(deg) / 2.0
    return (math.sin(h), 0.0, 0.0, math.cos(h))


def terminal_pose(q_lock, q_dp, p_dp):
    qf = qmul(q_lock, qconj(q_dp))
    pf = tuple(-c for c in rotate(qf, p_dp))
    return qf, pf


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--qlock", type=float, nargs=4, default=[0.0, 0.0, 1.0, 0.0])
    ap.add_argument("--qf", type=float, nargs=4, default=[0.0, 0.26, 0.97, 0.0])
    ap.add_argument("--pf", type=float, nargs=3, default=[4.48, -0.05, 0.17])
    ap.add_argument("--digits", type=int, default=2, help="decimal digits the target pose is given to")
    args = ap.parse_args()

    q_lock = qnormalize(args.qlock)
    qf_target = qnormalize(args.qf)

    # conj(q_dp) = conj(q_lock) * q_f; keep its x-axis rotation angle.
    r = qmul(qconj(q_lock), qf_target)
    if r[3] < 0.0:
        r = tuple(-c for c in r)
    angle = math.degrees(2.0 * math.atan2(r[0], r[3]))
    off_axis = math.hypot(r[1], r[2])
    q_dp = x_rotation(-round(angle))

    # p_dp = -R(q_f)^T p_f with the fitted q_f.
    qf, _ = terminal_pose(q_lock, q_dp, (0.0, 0.0, 0.0))
    p_dp = tuple(-c for c in rotate(qconj(qf), args.pf))

    qf_check, pf_check = terminal_pose(q_lock, q_dp, p_dp)
    tol = 0.5 * 10.0 ** (-args.digits)
    q_err = max(min(abs(a - b), abs(a + b)) for a, b in zip(qf_check, args.qf))
    p_err = max(abs(a - b) for a, b in zip(pf_check, args.pf))

    print(f"# fitted rotation about body x: {angle:.3f} deg (rounded to {round(angle)}), off-axis residue {off_axis:.3g}")
    print("docking:")
    print(f"  q_lock: [{', '.join(repr(c) for c in q_lock)}]")
    print(f"  q_dp: [{', '.join(repr(c) for c in q_dp)}]")
    print(f"  p_dp: [{', '.join(repr(c) for c in p_dp)}]")
    print(f"# reproduced q_f = [{', '.join(f'{c:.4f}' for c in qf_check)}], p_f = [{', '.join(f'{c:.4f}' for c in pf_check)}]")
    print(f"# max deviation from target: q {q_err:.2e}, p {p_err:.2e} (tolerance {tol:g})")
    if q_err > tol or p_err > tol:
        raise SystemExit("calibration does not reproduce the target pose")


if __name__ == "__main__":
    main()
