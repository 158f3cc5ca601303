"""Tabulate split levels and framing constants over a grid of (n, m/n).

    python3 scripts/schedule_table.py
"""

from wlsample.sparsify import build_schedule


def main():
    print(f"{'n':>4}{'m':>10}{'L':>4}{'c0':>10}{'C0':>10}")
    for n in (1, 2, 4, 8, 16):
        for q in (64, 128, 256, 1024, 10**4):
            s = build_schedule(n, n * q)
            print(f"{n:>4}{n * q:>10}{s.levels:>4}{s.c0:>10.3f}{s.C0:>10.3f}")


if __name__ == "__main__":
    main()
