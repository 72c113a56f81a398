"""Seeded campaigns, CSV output and the running-time tail.

Every trial seed is derived from the master seed and the trial index, so a
campaign gives the same CSV whatever the thread count.
"""
import os
import tempfile

from smoothedp.harness import ExperimentConfig, csv_body, read_csv, run_campaign

cfg = ExperimentConfig(target="tailcheck", n=8, W=8, rho=1, trials=3000, seed=42, eps="1/2", c=3)
res = run_campaign(cfg, threads=1)
print("moment estimate:", res.summary["moment"])
print(f"{'T':>8} {'empirical':>10} {'bound':>8} {'markov':>8}")
for T, p, bound, markov in res.rows:
    print(f"{T:>8} {p:>10.4f} {bound:>8.4f} {markov:>8.4f}")

same = csv_body(res.to_csv()) == csv_body(run_campaign(cfg, threads=4).to_csv())
print("\n1 vs 4 threads identical:", same)

with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "solve.csv")
    run_campaign(ExperimentConfig(target="solve", n=8, trials=200, seed=42)).write(path)
    header, rows = read_csv(path)
    print("header:", header)
    print("first row:", rows[0])
