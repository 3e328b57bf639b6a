"""Minimal wire-protocol model server used as a test fixture.

Serves a halfspace (label 1 where w.z <= b) over the stdio line protocol.
Fault-injection modes let tests exercise the client's error paths:

  ok          well-behaved server
  short       responds with k-1 labels
  garbage     responds with non-integer tokens
  bad-label   responds with labels outside [0, classes)
  close-early exits silently before answering the first batch
  bad-handshake emits a malformed handshake line
"""

import sys


def main() -> int:
    mode = sys.argv[1] if len(sys.argv) > 1 else "ok"
    w = [float(t) for t in sys.argv[2].split(",")] if len(sys.argv) > 2 else [1.0, 0.0]
    b = float(sys.argv[3]) if len(sys.argv) > 3 else 1.0

    if mode == "bad-handshake":
        sys.stdout.write("HELLO WORLD\n")
        sys.stdout.flush()
        return 0
    sys.stdout.write(f"CSMOOTH/1 d={len(w)} classes=2\n")
    sys.stdout.flush()

    for line in sys.stdin:
        line = line.strip()
        if line == "Q":
            return 0
        if not line.startswith("B "):
            sys.stderr.write(f"unexpected request: {line!r}\n")
            return 1
        k = int(line.split()[1])
        if mode == "close-early":
            return 0
        labels = []
        for _ in range(k):
            values = [float(t) for t in sys.stdin.readline().split()]
            labels.append(1 if sum(wi * vi for wi, vi in zip(w, values)) <= b else 0)
        if mode == "short":
            labels = labels[:-1]
        elif mode == "garbage":
            labels = ["x"] * k
        elif mode == "bad-label":
            labels = [7] * k
        sys.stdout.write(" ".join(str(v) for v in labels) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
