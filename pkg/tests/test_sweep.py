import numpy as np
import pytest

from qaoalab.errors import SweepError, ValidationError
from qaoalab.evolve import instance_ground_manifold, squared_overlap
from qaoalab.problems import build_ising_problem, build_sat_problem, random_3sat, random_ising
from qaoalab.sweep import (
    GridSpec,
    PhaseDiagram,
    delta_crit,
    export_csv,
    export_json,
    import_csv,
    import_json,
    run_sweep,
)

from test_evolve import diagonal_instance


@pytest.fixture(scope="module")
def small_sat_diagram(tmp_path_factory):
    inst = build_sat_problem(random_3sat(6, 18, seed=13))
    grid = GridSpec(
        delta_values=np.linspace(0.1, 2.0, 6),
        p_values=np.array([1, 5, 10, 20]),
    )
    return inst, run_sweep(inst, grid)


class TestRunSweep:
    def test_near_identity_protocol(self):
        inst = build_ising_problem(random_ising(4, seed=21))
        grid = GridSpec(delta_values=np.array([1e-6]), p_values=np.array([1]))
        pd = run_sweep(inst, grid)
        assert abs(pd.cell(0, 0) - pd.initial_overlap) < 1e-6

    def test_ground_state_instance_all_ones(self):
        inst = diagonal_instance([0.0, -2.0, 1.0, 3.0], initial_index=1)
        grid = GridSpec(
            delta_values=np.linspace(0.2, 3.0, 4), p_values=np.array([1, 3, 7])
        )
        pd = run_sweep(inst, grid)
        assert np.allclose(pd.overlaps, 1.0)

    def test_initial_overlap_recorded(self, small_sat_diagram):
        inst, pd = small_sat_diagram
        manifold = instance_ground_manifold(inst)
        assert pd.initial_overlap == pytest.approx(
            squared_overlap(inst.initial, manifold)
        )

    def test_subgrid_equals_submatrix(self, small_sat_diagram):
        inst, pd = small_sat_diagram
        sub = GridSpec(
            delta_values=pd.grid.delta_values[1:3],
            p_values=pd.grid.p_values[::2],
        )
        sub_pd = run_sweep(inst, sub)
        assert np.array_equal(sub_pd.overlaps, pd.overlaps[1:3, ::2])

    def test_thread_count_does_not_change_bytes(self, tmp_path):
        inst = build_ising_problem(random_ising(4, seed=2))
        grid = GridSpec(
            delta_values=np.linspace(0.1, 1.0, 4), p_values=np.array([1, 4, 9])
        )
        payloads = []
        for threads in (1, 2, 8):
            pd = run_sweep(inst, grid, threads=threads)
            path = tmp_path / f"t{threads}.csv"
            export_csv(pd, path, sidecar=False)
            payloads.append(path.read_bytes())
        assert payloads[0] == payloads[1] == payloads[2]

    def test_commuting_mixer_p_independent(self):
        # diagonal cost with diagonal mixer: only phases accumulate
        inst = diagonal_instance([0.3, -1.2, 0.9, 2.0], initial_index=0)
        grid = GridSpec(
            delta_values=np.array([0.7, 2.5]), p_values=np.array([1, 10, 40])
        )
        pd = run_sweep(inst, grid)
        for row in pd.overlaps:
            assert np.max(np.abs(row - row[0])) < 1e-10

    def test_failed_cells_recorded_and_threshold(self, monkeypatch):
        from qaoalab import evolve as evolve_module
        from qaoalab.errors import ConvergenceError

        inst = build_ising_problem(random_ising(3, seed=5))
        grid = GridSpec(
            delta_values=np.linspace(0.2, 1.0, 5), p_values=np.arange(1, 5)
        )
        original = evolve_module.QaoaEvolver.evolve
        calls = {"n": 0}

        def flaky(self, schedule):
            calls["n"] += 1
            if calls["n"] == 3:
                raise ConvergenceError("synthetic failure")
            return original(self, schedule)

        monkeypatch.setattr(evolve_module.QaoaEvolver, "evolve", flaky)
        import qaoalab.sweep as sweep_module

        pd = sweep_module.run_sweep(inst, grid)
        assert len(pd.failed_cells) == 1
        assert np.isnan(pd.overlaps).sum() == 1

        def always_fail(self, schedule):
            raise ConvergenceError("synthetic failure")

        monkeypatch.setattr(evolve_module.QaoaEvolver, "evolve", always_fail)
        with pytest.raises(SweepError):
            sweep_module.run_sweep(inst, grid)


class TestDeltaCrit:
    def make_diagram(self, columns, deltas, initial=0.5):
        overlaps = np.asarray(columns, dtype=float)
        grid = GridSpec(
            delta_values=np.asarray(deltas, dtype=float),
            p_values=np.arange(1, overlaps.shape[1] + 1),
        )
        return PhaseDiagram(
            overlaps=overlaps, initial_overlap=initial, grid=grid
        )

    def test_monotone_column_absent(self):
        pd = self.make_diagram([[0.6], [0.7], [0.9]], [1.0, 2.0, 3.0])
        assert delta_crit(pd) == [None]

    def test_explicit_threshold_rule(self):
        pd = self.make_diagram([[0.9], [0.9], [0.3]], [1.0, 2.0, 3.0])
        assert delta_crit(pd, "first_drop_below", threshold=0.5) == [2.0]

    def test_first_cell_below_gives_none(self):
        pd = self.make_diagram([[0.1], [0.2], [0.3]], [1.0, 2.0, 3.0])
        assert delta_crit(pd, "first_drop_below", threshold=0.5) == [None]

    def test_never_returns_below_initial(self, small_sat_diagram):
        _, pd = small_sat_diagram
        crits = delta_crit(pd)
        for j, crit in enumerate(crits):
            if crit is None:
                continue
            i = int(np.nonzero(pd.grid.delta_values == crit)[0][0])
            assert pd.overlaps[i, j] >= pd.initial_overlap

    def test_unknown_rule(self, small_sat_diagram):
        _, pd = small_sat_diagram
        with pytest.raises(ValueError):
            delta_crit(pd, "nonsense")
        with pytest.raises(ValueError):
            delta_crit(pd, "first_drop_below")


class TestPersistence:
    def test_csv_round_trip_exact(self, small_sat_diagram, tmp_path):
        _, pd = small_sat_diagram
        path = tmp_path / "d.csv"
        export_csv(pd, path)
        again = import_csv(path)
        assert np.array_equal(
            np.asarray(pd.overlaps, float).round(20), again.overlaps
        ) or np.max(np.abs(pd.overlaps - again.overlaps)) < 1e-12
        # bit-for-bit: re-export reproduces identical bytes
        path2 = tmp_path / "d2.csv"
        export_csv(again, path2)
        assert path.read_bytes() == path2.read_bytes()
        assert again.initial_overlap == pytest.approx(pd.initial_overlap)

    def test_csv_header_grammar(self, tmp_path):
        inst = diagonal_instance([0.0, -1.0], initial_index=1)
        grid = GridSpec(delta_values=np.array([0.5, 1.5]), p_values=np.array([1, 2]))
        pd = run_sweep(inst, grid)
        path = tmp_path / "tiny.csv"
        export_csv(pd, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "delta\\p,1,2"
        assert lines[1].startswith("0.5,")
        assert len(lines) == 3

    def test_json_round_trip(self, small_sat_diagram, tmp_path):
        _, pd = small_sat_diagram
        path = tmp_path / "d.json"
        export_json(pd, path)
        again = import_json(path)
        assert np.max(np.abs(pd.overlaps - again.overlaps)) < 1e-12
        assert again.grid.kind == pd.grid.kind
        assert again.initial_overlap == pytest.approx(pd.initial_overlap)

    def test_delta_crit_stable_across_round_trip(self, small_sat_diagram, tmp_path):
        _, pd = small_sat_diagram
        path = tmp_path / "d.csv"
        export_csv(pd, path)
        again = import_csv(path)
        assert delta_crit(again) == delta_crit(
            import_csv(path)
        )
        # and identical to the original diagram's output on re-rounded values
        assert delta_crit(again) == delta_crit(pd)

    def test_overlap_bounds_validated(self):
        grid = GridSpec(delta_values=np.array([1.0]), p_values=np.array([1]))
        with pytest.raises(ValidationError):
            PhaseDiagram(
                overlaps=np.array([[1.5]]), initial_overlap=0.5, grid=grid
            )
