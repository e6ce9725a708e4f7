"""The virtual QPU: modelled makespan and usage under three policies."""

# %%
from hadof import BackendSpec, qpu_usage_model
from hadof.scheduler import model_batch

ids = [f"job{i}" for i in range(20)]
one = [BackendSpec("qpu0", service_time_s=3.0)]
four = [BackendSpec(f"qpu{i}", service_time_s=3.0) for i in range(4)]

for policy, backends in (
    ("sequential", one),
    ("parallel-one-backend", [BackendSpec("qpu0", service_time_s=3.0, worker_slots=3)]),
    ("parallel-multi-backend", four),
):
    ledger = model_batch(len(ids), ids, backends, policy)
    print(f"{policy:>24}: makespan {ledger.modelled_makespan_s:5.1f}s  QPU {ledger.modelled_qpu_s:5.1f}s")

# %%
# Usage for a full run: p expectation sweeps of ceil(n/k) circuits, plus the
# final sampling sweep unless include_final_sweep is False.
for n in (100, 200, 300, 400, 500):
    print(n, qpu_usage_model(n, 5, 5, include_final_sweep=False), qpu_usage_model(n, 5, 5))

# %%
# A ledger can be written out for inspection.
import tempfile
from pathlib import Path

with tempfile.TemporaryDirectory() as tmp:
    ledger.write(Path(tmp) / "ledger.csv")
    print((Path(tmp) / "ledger.csv").read_text().splitlines()[:3])
    print((Path(tmp) / "ledger.totals.json").read_text())
