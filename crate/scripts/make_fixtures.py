#!/usr/bin/env python3
"""Writes the small two-day dataset under crates/core/fixtures.

Passengers walk from their gate to a single FCFS immigration hall with a
piecewise-constant desk count; one in five carries a Wi-Fi device seen at
the gate and inside the hall. Output is deterministic for a fixed seed.
"""
import csv
import heapq
import math
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates" / "core" / "fixtures"
DAYS = [datetime(2024, 12, 2, tzinfo=timezone.utc), datetime(2024, 12, 3, tzinfo=timezone.utc)]
GATES = {f"G{i}": 120.0 + 55.0 * i for i in range(1, 11)}
FLIGHTS_PER_DAY = 24
SERVICE_MEAN = 75.0
# (start hour, desks)
STAFFING = [(5, 5), (10, 3), (14, 6), (21, 3)]
BIN = 900


def ts(t):
    return datetime.fromtimestamp(t, timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def walk_speed(rng):
    while True:
        if rng.random() < 0.65:
            v = rng.lognormvariate(math.log(1.25), 0.15)
        else:
            v = rng.gauss(0.75, 0.08)
        if v > 0.2:
            return v


def desks_at(day0, t):
    n = STAFFING[0][1]
    for hour, d in STAFFING:
        if t >= day0 + hour * 3600:
            n = d
    return n


def simulate(day0, passengers, rng):
    """FCFS multi-desk queue with a time-varying desk count; closing desks finish their passenger."""
    passengers.sort(key=lambda p: p["arrival"])
    free_at = {}
    for p in passengers:
        t = p["arrival"]
        while True:
            n = desks_at(day0, t)
            open_desks = [f"D{i + 1:02d}" for i in range(n)]
            start, desk = min((max(t, free_at.get(d, 0.0)), d) for d in open_desks)
            if desks_at(day0, start) >= n or start == t:
                break
            t = start
        p["start"] = start
        p["desk"] = desk
        p["departure"] = start + rng.expovariate(1.0 / SERVICE_MEAN)
        free_at[desk] = p["departure"]


def main():
    rng = random.Random(20241202)
    OUT.mkdir(parents=True, exist_ok=True)
    flights, stamps, wifi, actual = [], [], [], []
    device = 0
    schedule = [(f"QF{100 + i}", 5.5 * 3600 + i * 14.5 * 3600 / FLIGHTS_PER_DAY, rng.choice(sorted(GATES)))
                for i in range(FLIGHTS_PER_DAY)]
    for day0 in DAYS:
        d0 = day0.timestamp()
        passengers = []
        for fid, offset, gate in schedule:
            sched = d0 + offset
            delay = max(-600.0, rng.gauss(1500.0, 900.0))
            block = sched + delay
            flights.append([fid, ts(sched), ts(block), gate, "arrival", ""])
            for _ in range(rng.randint(80, 150)):
                walk = GATES[gate] / walk_speed(rng)
                passengers.append({"flight": fid, "gate": gate, "block": block, "arrival": block + walk})
        for k in range(4):
            t = d0 + 8 * 3600 + k * 3 * 3600
            flights.append([f"VA{200 + k}", ts(t), ts(t + 300), "G2", "departure", ""])
        simulate(d0, passengers, rng)
        for p in passengers:
            stamps.append([ts(p["departure"]), p["desk"], p["flight"], "arrival"])
            if rng.random() < 0.2:
                device += 1
                dev = f"dev{device:05d}"
                wifi.append([dev, ts(p["block"] + rng.uniform(0, 20)), p["gate"]])
                wifi.append([dev, ts(p["arrival"] + rng.uniform(0, 15)), "immigration"])
                if p["departure"] - p["arrival"] > 60:
                    wifi.append([dev, ts(p["departure"] - rng.uniform(0, 15)), "immigration"])
        for k in range(40):
            stamps.append([ts(d0 + 6 * 3600 + k * 900 + 30), "D01", "", "departure"])
        for k in range(300):
            device += 1
            wifi.append([f"dev{device:05d}", ts(d0 + rng.uniform(5, 22) * 3600), "retail"])

        bins = {}
        for p in passengers:
            b = int((p["departure"] - d0) // BIN)
            bins.setdefault(b, []).append(p["start"] - p["arrival"])
        last = max(bins)
        for b in range(min(bins), last + 1):
            end = d0 + (b + 1) * BIN
            waiting = sum(1 for p in passengers if p["arrival"] < end <= p["start"])
            serving = sum(1 for p in passengers if p["start"] < end <= p["departure"])
            w = bins.get(b, [])
            actual.append([d0 + b * BIN, ts(d0 + b * BIN), BIN, waiting, len(w),
                           sum(w) / len(w) if w else 0.0, waiting + serving])

    stamps.sort(key=lambda r: r[0])
    wifi.sort(key=lambda r: (r[1], r[0]))

    def write(name, header, rows):
        with open(OUT / name, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)

    write("flights.csv", ["flight_id", "scheduled_time", "actual_time", "gate", "direction", "passenger_count"], flights)
    write("stamps.csv", ["timestamp", "desk_id", "flight_id", "direction"], stamps)
    write("wifi.csv", ["device_id", "timestamp", "zone"], wifi)
    write("distances.csv", ["gate", "distance_m"], [[g, d] for g, d in sorted(GATES.items())])
    staffing = []
    for day0 in DAYS:
        for hour, d in STAFFING:
            staffing.append([ts(day0.timestamp() + hour * 3600), d])
    write("staffing.csv", ["start_time", "desks"], staffing)
    write("actual_bins.csv", ["bin_start", "time", "bin_width", "queue_length", "throughput", "mean_wait", "demand"],
          [[int(r[0]), r[1], r[2], r[3], r[4], round(r[5], 3), r[6]] for r in actual])


if __name__ == "__main__":
    main()
