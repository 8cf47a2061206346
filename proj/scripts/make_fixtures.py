#!/usr/bin/env python3
"""Regenerate the committed data fixtures.

Everything here is deterministic; rerunning the script reproduces the files
byte for byte.
"""

import json
import pathlib
import random

ROOT = pathlib.Path(__file__).resolve().parent.parent
DATA = ROOT / "data"


def conv(maps, fcmp, out_el):
    return ("Convolutional", {"input_feature_maps": maps, "filter_compute": fcmp}, out_el)


def relu(n):
    return ("Relu", {"input_size": n}, n)


def lrn(n):
    return ("LocalResponseNormalization", {"input_size": n}, n)


def pool(n_in, n_out):
    return ("Pooling", {"input_size": n_in, "output_size": n_out}, n_out)


def drop(n):
    return ("Dropout", {"input_size": n}, n)


def fc(n_in, n_out):
    return ("FullyConnected", {"input_size": n_in, "output_size": n_out}, n_out)


# AlexNet-style trunk for 32x32x3 input. Feature map sizes are element counts,
# output_bytes assumes 4-byte floats.
TRUNK = [
    conv(3, 1600, 65536),     # conv1: 64 5x5 filters
    relu(65536),
    lrn(65536),
    pool(65536, 16384),       # 3x3/2
    conv(64, 2400, 24576),    # conv2: 96 5x5 filters
    relu(24576),
    lrn(24576),
    pool(24576, 6144),
    conv(96, 1152, 8192),     # conv3: 128 3x3 filters
    relu(8192),
    conv(128, 1152, 8192),    # conv4
    relu(8192),
    conv(128, 864, 6144),     # conv5: 96 3x3 filters
    relu(6144),
    pool(6144, 1536),
    fc(1536, 1024),           # fc6
    relu(1024),
    drop(1024),
    fc(1024, 512),            # fc7
    relu(512),
    drop(512),
    fc(512, 10),              # fc8
]

BRANCHES = [
    # (accuracy, layers)
    (0.55, TRUNK[:8] + [conv(96, 3132, 22272), relu(22272), pool(22272, 5568), fc(5568, 10)]),
    (0.60, TRUNK[:10] + [conv(128, 2016, 14336), relu(14336), pool(14336, 3584),
                         fc(3584, 128), relu(128), fc(128, 10)]),
    (0.70, TRUNK[:15] + [fc(1536, 896), relu(896), drop(896), fc(896, 10)]),
    (0.745, TRUNK[:15] + [fc(1536, 1024), relu(1024), fc(1024, 256), relu(256), fc(256, 10)]),
    (0.785, TRUNK),
]


def write_model():
    branches = []
    for idx, (acc, layers) in enumerate(BRANCHES, start=1):
        branches.append({
            "exit_index": idx,
            "accuracy": acc,
            "layers": [
                {"kind": kind, "features": feats, "output_bytes": out_el * 4}
                for kind, feats, out_el in layers
            ],
        })
    model = {"name": "branchy_alexnet", "input_bytes": 12288, "branches": branches}
    path = DATA / "branchy_alexnet.json"
    path.write_text(json.dumps(model, indent=2) + "\n")
    print(path, f"({len(branches)} branches,",
          ", ".join(str(len(b['layers'])) for b in branches), "layers)")


# Campus shuttle wifi trace: eight regimes, two of them hovering around the
# partition crossover so a reactive planner keeps flip-flopping.
BUS_SEGMENTS = [
    # (mean_kbps, seconds, stddev)
    (900, 40, 55),
    (380, 35, 40),
    (1150, 45, 85),
    (580, 40, 65),
    (1300, 50, 95),
    (300, 30, 35),
    (660, 35, 70),
    (1000, 25, 75),
]


def write_bus_trace():
    rng = random.Random(20240817)
    rows = []
    t = 0
    for mean, seconds, sd in BUS_SEGMENTS:
        for k in range(seconds):
            if k == 0:
                v = mean + rng.gauss(0.0, sd / 10.0)
            else:
                v = rng.gauss(mean, sd)
            v = min(max(v, 120.0), 1550.0)
            rows.append((t, round(v, 1)))
            t += 1000
    path = DATA / "bus.csv"
    lines = ["timestamp_ms,bandwidth_kbps"]
    lines += [f"{ts},{v}" for ts, v in rows]
    path.write_text("\n".join(lines) + "\n")
    print(path, f"({len(rows)} samples)")


def write_states():
    n = 428
    lo, hi = 150.0, 6000.0
    path = DATA / "oboe_states.csv"
    lines = ["state_kbps"]
    for k in range(n):
        v = lo + k * (hi - lo) / (n - 1)
        lines.append(f"{round(v, 2)}")
    path.write_text("\n".join(lines) + "\n")
    print(path, f"({n} states)")


def write_oboe_traces():
    outdir = DATA / "oboe_traces"
    outdir.mkdir(exist_ok=True)
    rng = random.Random(514)
    for i in range(1, 6):
        level = rng.uniform(400.0, 4. * 1000.0)
        lines = ["start_s,end_s,avg_bandwidth_kbps"]
        t = 0.0
        for _ in range(49):
            dur = rng.choice([2.0, 3.0, 4.0])
            level = min(max(level + rng.gauss(0.0, level * 0.08), 200.0), 5800.0)
            lines.append(f"{t},{t + dur},{round(level, 1)}")
            t += dur
        path = outdir / f"session_{i:02d}.csv"
        path.write_text("\n".join(lines) + "\n")
        print(path)


def main():
    DATA.mkdir(exist_ok=True)
    write_model()
    write_bus_trace()
    write_states()
    write_oboe_traces()


if __name__ == "__main__":
    main()
