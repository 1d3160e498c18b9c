#!/usr/bin/env python3
"""Reference model of the three-phase PWM generator used to cross-check the
Verilog corpus against an external simulator (yosys CXXRTL).

Usage: pwm_oracle.py [duty [cycles]]   (no args: sweep 0,64,128,192 x 512)
Prints cycle,pwm,pwm_n,c1,c2,c3 per cycle, same layout as the CXXRTL driver.
"""
import sys

RES, P, D, RESET = 256, 85, 4, 4


def main():
    sweep = len(sys.argv) < 2
    fixed = 0 if sweep else int(sys.argv[1])
    cycles = int(sys.argv[2]) if len(sys.argv) > 2 else 2048
    c = [0, 0, 0]
    latch = [False, False]
    q = [0, 0, 0]
    s = [[0] * D for _ in range(3)]
    for t in range(cycles):
        duty = (0, 64, 128, 192)[(t // 512) % 4] if sweep else fixed
        if t < RESET:
            c, latch, q, s = [0, 0, 0], [False, False], [0, 0, 0], [[0] * D for _ in range(3)]
        else:
            thresh = RES - duty
            raw = [int(x >= thresh) for x in c]
            e2 = latch[0] or c[0] == P
            e3 = latch[1] or c[1] == P
            s = [[q[k]] + s[k][:-1] for k in range(3)]
            q = raw
            c = [(c[0] + 1) % RES, (c[1] + 1) % RES if e2 else c[1], (c[2] + 1) % RES if e3 else c[2]]
            latch = [e2, e3]
        pwm = sum((q[k] & s[k][-1]) << k for k in range(3))
        rst_ok = int(t >= RESET)
        pwm_n = sum((rst_ok & (1 - q[k]) & (1 - s[k][-1])) << k for k in range(3))
        print(f"{t},{pwm},{pwm_n},{c[0]},{c[1]},{c[2]}")


if __name__ == "__main__":
    main()
