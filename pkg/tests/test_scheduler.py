import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hadof.qubo import IsingModel, random_qubo, to_ising
from hadof.scheduler import (
    POLICIES,
    BackendSpec,
    CircuitJob,
    JobError,
    LocalExecutor,
    TimingLedger,
    execute_batch,
    model_batch,
    qpu_usage_model,
)
from hadof.simulator import AnnealSchedule, qubit_expectations, run_circuit


def make_jobs(count, k=4, kind="expectation", seed=0, exact=False):
    rng = np.random.default_rng(seed)
    sched = AnnealSchedule.linear(5)
    jobs = []
    for i in range(count):
        q = random_qubo(k, seed=int(rng.integers(1 << 30)))
        jobs.append(CircuitJob(f"j{i}", to_ising(q).normalized(), sched, 5, 64, (seed, 0, 1, i), kind, exact=exact))
    return jobs


def results_key(results):
    return [
        (r.job_id, None if r.expectations is None else r.expectations.tobytes(),
         None if r.samples is None else r.samples.draws.tobytes())
        for r in results
    ]


class TestDiscreteEventModel:
    def test_sequential_20_jobs(self):
        led = model_batch(20, [f"j{i}" for i in range(20)], [BackendSpec()], "sequential")
        assert led.modelled_makespan_s == 60 and led.modelled_qpu_s == 60

    def test_four_backends(self):
        backends = [BackendSpec(f"q{i}") for i in range(4)]
        led = model_batch(20, [f"j{i}" for i in range(20)], backends, "parallel-multi-backend")
        assert led.modelled_makespan_s == 15 and led.modelled_qpu_s == 60
        assert {e.backend for e in led.entries} == {"q0", "q1", "q2", "q3"}

    def test_one_backend_slots(self):
        led = model_batch(20, [f"j{i}" for i in range(20)], [BackendSpec(worker_slots=5)], "parallel-one-backend")
        assert led.modelled_makespan_s == 12

    def test_queue_delay_shifts_start(self):
        led = model_batch(2, ["a", "b"], [BackendSpec(queue_delay_s=1.5)], "sequential")
        assert [e.start_s for e in led.entries] == [1.5, 4.5]
        assert led.modelled_makespan_s == 7.5

    @given(st.integers(1, 60), st.integers(1, 8), st.floats(0, 10))
    def test_multi_backend_makespan_formula(self, jobs, backends, service):
        specs = [BackendSpec(f"q{i}", service_time_s=service) for i in range(backends)]
        led = model_batch(jobs, [str(i) for i in range(jobs)], specs, "parallel-multi-backend")
        assert led.modelled_makespan_s == pytest.approx(math.ceil(jobs / backends) * service)

    @given(st.integers(1, 40), st.floats(0, 10))
    def test_qpu_conserved_across_policies(self, jobs, service):
        specs = [BackendSpec(f"q{i}", service_time_s=service, worker_slots=2) for i in range(3)]
        ids = [str(i) for i in range(jobs)]
        totals = {p: model_batch(jobs, ids, specs, p).modelled_qpu_s for p in POLICIES}
        assert len(set(totals.values())) == 1
        assert totals["sequential"] == pytest.approx(jobs * service)

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            model_batch(1, ["a"], [], "sequential")
        with pytest.raises(ValueError):
            model_batch(1, ["a"], [BackendSpec()], "round-robin")
        with pytest.raises(ValueError):
            BackendSpec(service_time_s=-1)
        with pytest.raises(ValueError):
            BackendSpec(worker_slots=0)


class TestQpuUsageModel:
    def test_expectation_sweeps_only(self):
        assert qpu_usage_model(100, 5, 5, 3.0, include_final_sweep=False) == 300

    def test_genome_sized(self):
        assert qpu_usage_model(250, 5, 5, 3.0, include_final_sweep=False) == 750

    def test_default_counts_final_sweep(self):
        assert qpu_usage_model(100, 5, 5, 3.0) == 360

    def test_zero_service(self):
        assert qpu_usage_model(100, 5, 5, 0.0) == 0

    def test_invalid(self):
        with pytest.raises(ValueError):
            qpu_usage_model(0, 5, 5)
        with pytest.raises(ValueError):
            qpu_usage_model(10, 5, 5, -1.0)


class TestLedger:
    def test_write_csv_and_totals(self, tmp_path):
        led = model_batch(3, ["a", "b", "c"], [BackendSpec()], "sequential")
        led.write(tmp_path / "ledger.csv")
        lines = (tmp_path / "ledger.csv").read_text().splitlines()
        assert lines[0] == "job_id,backend,submit_s,start_s,finish_s"
        assert len(lines) == 4
        totals = json.loads((tmp_path / "ledger.totals.json").read_text())
        assert totals["jobs"] == 3 and totals["modelled_qpu_s"] == 9

    def test_extend_shifts(self):
        led = TimingLedger()
        batch = model_batch(2, ["a", "b"], [BackendSpec()], "sequential")
        led.extend(batch, led.end_s)
        led.extend(batch, led.end_s)
        assert led.end_s == 12 and led.modelled_makespan_s == 12 and led.modelled_qpu_s == 12


class TestExecution:
    def test_results_independent_of_policy(self):
        jobs = make_jobs(9)
        backends = [BackendSpec(f"q{i}") for i in range(3)]
        keys = [results_key(execute_batch(jobs, backends, p, workers=3)[0]) for p in POLICIES]
        assert keys[0] == keys[1] == keys[2]

    def test_results_independent_of_batch_composition(self):
        jobs = make_jobs(6)
        together = results_key(execute_batch(jobs, [BackendSpec()], workers=1)[0])
        alone = [results_key(execute_batch([j], [BackendSpec()])[0])[0] for j in jobs]
        assert together == alone

    def test_exact_job_matches_simulator(self):
        (job,) = make_jobs(1, exact=True)
        (res,), _ = execute_batch([job], [BackendSpec()])
        want = qubit_expectations(run_circuit(job.model, job.schedule, job.depth))
        np.testing.assert_allclose(res.expectations, want, atol=1e-12)

    def test_sample_job(self):
        (job,) = make_jobs(1, kind="sample")
        (res,), _ = execute_batch([job], [BackendSpec()])
        assert res.samples.shots == 64 and res.expectations is None

    def test_mixed_widths(self):
        jobs = make_jobs(2, k=3) + make_jobs(2, k=2, seed=1)
        results, ledger = execute_batch(jobs, [BackendSpec()], workers=2)
        assert [len(r.expectations) for r in results] == [3, 3, 2, 2]
        assert len(ledger.entries) == 4

    def test_job_error_wraps_cause(self):
        bad = CircuitJob("bad", IsingModel(2, np.zeros(2), {}), AnnealSchedule.linear(2), 3, 10, (0,))
        with pytest.raises(JobError) as info:
            execute_batch([bad], [BackendSpec()])
        assert info.value.job_id == "bad"

    def test_executor_accumulates(self):
        with LocalExecutor(workers=2) as ex:
            ex.run(make_jobs(4))
            ex.run(make_jobs(4, seed=1))
        assert ex.jobs_executed == 8
        assert ex.ledger.modelled_qpu_s == 24
        assert ex.ledger.modelled_makespan_s == 24

    def test_process_pool(self):
        jobs = make_jobs(4)
        with LocalExecutor(workers=2, pool="process") as ex:
            got = results_key(ex.run(jobs))
        assert got == results_key(execute_batch(jobs, [BackendSpec()])[0])

    def test_executor_validation(self):
        with pytest.raises(ValueError):
            LocalExecutor(workers=0)
        with pytest.raises(ValueError):
            LocalExecutor(policy="nope")

    def test_parallel_wall_clock_not_slower(self):
        jobs = make_jobs(40, k=5)

        def best_of(policy):
            return min(execute_batch(jobs, [BackendSpec()], policy, workers=4)[1].measured_wall_clock_s for _ in range(3))

        # coarse: the parallel path must not lose to one-at-a-time execution
        assert best_of("parallel-one-backend") <= 1.5 * best_of("sequential")
