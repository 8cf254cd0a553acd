import numpy as np
import pytest
from dataclasses import replace

from lpsrecon import (
    ExperimentSpec,
    SolverOptions,
    build_solver_config,
    generate,
    load_mask,
    load_volume,
    make_mask,
    acquire,
    parse_config,
    run_sweep,
    save_volume,
)
from lpsrecon.cli import main
from lpsrecon.harness import _mask_seed, write_summary_csv, write_sweep_csv
from lpsrecon.phantom import PhantomSpec

CONFIG_TEXT = """\
# full experiment description
[phantom]
n_x = 32
n_y = 32
n_z = 4
n_frames = 3
background_rank = 2
n_blobs = 3
blob_amplitude = 0.04
motion_step = 1.0
noise_sigma = 0.0
seed = 0

[solver.ls]
lambda_l = auto
lambda_s = auto   # data-scaled default
tol = 1e-3
max_iter = 300

[solver.priori]
lambda_p = 0.7
support_eps = 0.02

[sweep]
first_frame_rate = 0.5
rates = 0.2, 0.333333
solvers = ls, priori-ls
n_seeds = 1
output_dir = unused
"""


@pytest.fixture()
def config_file(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text(CONFIG_TEXT)
    return path


def test_parse_config_round_trip(config_file):
    experiment, ls_opts, priori_opts = parse_config(config_file)
    assert experiment.phantom.dims == (32, 32, 4)
    assert experiment.phantom.n_frames == 3
    assert experiment.first_frame_rate == 0.5
    assert experiment.rates == (0.2, 0.333333)
    assert experiment.solvers == ("ls", "priori-ls")
    assert experiment.n_seeds == 1
    assert ls_opts.lambda_l is None and ls_opts.lambda_s is None
    assert priori_opts.lambda_p == 0.7


def test_parse_config_defaults_for_missing_sections(tmp_path):
    path = tmp_path / "empty.cfg"
    path.write_text("[phantom]\nn_frames = 2\n")
    experiment, ls_opts, _ = parse_config(path)
    assert experiment.phantom.n_frames == 2
    assert experiment.rates == ExperimentSpec().rates
    assert ls_opts.max_iter == 300


def test_experiment_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(rates=())
    with pytest.raises(ValueError):
        ExperimentSpec(rates=(0.3, 0.2))
    with pytest.raises(ValueError):
        ExperimentSpec(rates=(0.2, 1.5))
    with pytest.raises(ValueError):
        ExperimentSpec(solvers=("magic",))
    with pytest.raises(ValueError):
        ExperimentSpec(n_seeds=0)


def test_build_solver_config_auto_and_override():
    seq = generate(PhantomSpec())
    mask = make_mask(32, 32, 0.5, 2.0, seed=7)
    y = acquire(seq.frames[0], mask)
    auto = build_solver_config(y, SolverOptions())
    assert auto.lambda_L > 0 and auto.lambda_S > 0
    fixed = build_solver_config(y, SolverOptions(lambda_l=0.9, lambda_s=0.8))
    assert fixed.lambda_L == 0.9 and fixed.lambda_S == 0.8
    half = build_solver_config(y, SolverOptions(lambda_l=0.9))
    assert half.lambda_L == 0.9 and half.lambda_S == auto.lambda_S


def test_mask_seed_is_stable():
    assert _mask_seed(0, 0, 0.2, 0) == _mask_seed(0, 0, 0.2, 0)
    seeds = {
        _mask_seed(0, s, r, t)
        for s in range(3)
        for r in (0.2, 1 / 3)
        for t in (0, 1)
    }
    assert len(seeds) == 12


@pytest.fixture(scope="module")
def small_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    experiment = ExperimentSpec(
        phantom=PhantomSpec(n_frames=3),
        rates=(0.2, 1 / 3),
        solvers=("ls", "priori-ls"),
        n_seeds=1,
        output_dir=str(out),
    )
    rows = run_sweep(experiment)
    return experiment, rows, out


def test_sweep_row_grid(small_sweep):
    experiment, rows, _ = small_sweep
    assert len(rows) == 2 * 2 * 1 * 3  # solvers x rates x seeds x frames
    first_frame_rows = [r for r in rows if r.frame == 1]
    assert all(r.rate == experiment.first_frame_rate for r in first_frame_rows)
    assert all(r.iterations <= 300 for r in rows)


def test_sweep_csv_shape_and_order(small_sweep):
    _, _, out = small_sweep
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "solver,rate,seed,frame,psnr_db,iterations,converged"
    assert len(lines) == 1 + 12
    body = [line.split(",") for line in lines[1:]]
    keys = [(p[0], float(p[1]), int(p[2]), int(p[3])) for p in body]
    assert keys == sorted(keys)


def test_summary_csv_averages_swept_frames_only(small_sweep):
    experiment, rows, out = small_sweep
    lines = (out / "summary.csv").read_text().splitlines()
    assert lines[0] == "solver,rate,mean_psnr_db"
    assert len(lines) == 1 + len(experiment.solvers) * len(experiment.rates)
    for line in lines[1:]:
        solver, rate, mean = line.split(",")
        expected = np.mean(
            [
                r.psnr_db
                for r in rows
                if r.solver == solver
                and r.frame >= 2
                and abs(round(r.rate, 6) - float(rate)) < 1e-12
            ]
        )
        assert float(mean) == pytest.approx(expected, abs=1e-6)


def test_sweep_rerun_is_byte_identical(small_sweep, tmp_path):
    experiment, _, out = small_sweep
    rerun = replace(experiment, output_dir=str(tmp_path / "again"))
    run_sweep(rerun)
    assert (tmp_path / "again" / "sweep.csv").read_bytes() == (out / "sweep.csv").read_bytes()
    assert (tmp_path / "again" / "summary.csv").read_bytes() == (
        out / "summary.csv"
    ).read_bytes()


def test_sweep_is_paired_across_solvers(small_sweep):
    # Both solver arms see identical phantoms and masks; frame 1 is the
    # same baseline solve in each, so its rows must agree exactly.
    _, rows, _ = small_sweep
    ls_first = sorted(
        (r.seed, r.psnr_db, r.iterations, r.converged)
        for r in rows
        if r.solver == "ls" and r.frame == 1
    )
    pr_first = sorted(
        (r.seed, r.psnr_db, r.iterations, r.converged)
        for r in rows
        if r.solver == "priori-ls" and r.frame == 1
    )
    assert ls_first and ls_first == pr_first


def test_run_log_holds_timing_not_csv(small_sweep):
    _, _, out = small_sweep
    log = (out / "run.log").read_text()
    assert "wall=" in log
    assert "wall" not in (out / "sweep.csv").read_text()


def test_csv_writers_handle_sentinel(tmp_path):
    from lpsrecon.harness import SweepRow

    rows = [
        SweepRow("ls", 0.2, 0, 1, float("inf"), 3, True, 0.0),
        SweepRow("ls", 0.2, 0, 2, 30.0, 3, True, 0.0),
    ]
    write_sweep_csv(tmp_path / "s.csv", rows)
    write_summary_csv(tmp_path / "m.csv", rows)
    assert "inf" in (tmp_path / "s.csv").read_text()
    assert (tmp_path / "m.csv").read_text().splitlines()[1] == "ls,0.200000,30.000000"


class TestCli:
    def test_eval_self_comparison(self, tmp_path, capsys):
        seq = generate(PhantomSpec(n_frames=1))
        path = tmp_path / "a.x"
        save_volume(path, seq.frames[0])
        assert main(["eval", str(path), str(path)]) == 0
        assert "psnr_db=inf" in capsys.readouterr().out

    def test_eval_missing_file_exits_1(self, tmp_path, capsys):
        assert main(["eval", str(tmp_path / "no.x"), str(tmp_path / "no.x")]) == 1
        assert "error:" in capsys.readouterr().err

    def test_mask_gen(self, tmp_path, capsys):
        out = tmp_path / "m.lpsm"
        code = main(
            ["mask", "gen", "--nx", "32", "--ny", "32", "--rate", "0.25", "--seed", "3",
             "--out", str(out)]
        )
        assert code == 0
        mask = load_mask(out)
        assert mask.m == round(0.25 * 1024)

    def test_phantom_gen_and_recon(self, tmp_path, capsys, config_file):
        frames_dir = tmp_path / "frames"
        assert main(["phantom", "gen", "--config", str(config_file),
                     "--out", str(frames_dir)]) == 0
        files = sorted(frames_dir.glob("*.x"))
        assert len(files) == 3
        vol = load_volume(files[0])
        assert vol.dims == (32, 32, 4)

        mask_path = tmp_path / "m.lpsm"
        main(["mask", "gen", "--nx", "32", "--ny", "32", "--rate", "0.5", "--out",
              str(mask_path)])
        out_base = tmp_path / "rec1"
        code = main(["recon", "--input", str(files[0]), "--mask", str(mask_path),
                     "--out", str(out_base), "--config", str(config_file)])
        assert code == 0
        captured = capsys.readouterr()
        assert "frame,iterations,converged,data_residual,psnr_db" in captured.out
        assert (tmp_path / "rec1.x").exists()
        assert (tmp_path / "rec1.l").exists()
        assert (tmp_path / "rec1.s").exists()

        # prior flags must come together
        with pytest.raises(SystemExit) as exc:
            main(["recon", "--input", str(files[0]), "--mask", str(mask_path),
                  "--out", str(out_base), "--prior-l", "x.l"])
        assert exc.value.code == 2

        # prior-informed reconstruction of the next frame
        code = main(["recon", "--input", str(files[1]), "--mask", str(mask_path),
                     "--out", str(tmp_path / "rec2"), "--config", str(config_file),
                     "--prior-l", str(tmp_path / "rec1.l"),
                     "--prior-s", str(tmp_path / "rec1.s")])
        assert code == 0
        assert "priori-ls" in capsys.readouterr().err

    def test_recon_seq_single_frame_falls_back(self, tmp_path, capsys):
        seq = generate(PhantomSpec(n_frames=1))
        frames_dir = tmp_path / "one"
        frames_dir.mkdir()
        save_volume(frames_dir / "frame0001.x", seq.frames[0])
        out_dir = tmp_path / "seqout"
        code = main(["recon-seq", "--frames", str(frames_dir), "--out", str(out_dir),
                     "--solver", "priori-ls", "--rate", "0.333333"])
        assert code == 0
        captured = capsys.readouterr()
        assert "falling back to plain L+S" in captured.err
        assert "falling back to plain L+S" in (out_dir / "run.log").read_text()
        assert (out_dir / "metrics.csv").exists()
        assert (out_dir / "frame0001.x").exists()

    def test_recon_seq_writes_metrics_for_all_frames(self, tmp_path, capsys, config_file):
        frames_dir = tmp_path / "frames"
        main(["phantom", "gen", "--config", str(config_file), "--out", str(frames_dir)])
        out_dir = tmp_path / "seq"
        code = main(["recon-seq", "--frames", str(frames_dir), "--out", str(out_dir),
                     "--config", str(config_file), "--rate", "0.333333"])
        assert code == 0
        lines = (out_dir / "metrics.csv").read_text().splitlines()
        assert lines[0] == "frame,iterations,converged,data_residual,psnr_db"
        assert len(lines) == 4

    def test_sweep_cli_with_overrides(self, tmp_path, capsys, config_file):
        out_dir = tmp_path / "sw"
        code = main(["sweep", "--config", str(config_file), "--out", str(out_dir)])
        assert code == 0
        summary = (out_dir / "summary.csv").read_text().splitlines()
        assert len(summary) == 1 + 4  # 2 solvers x 2 rates

    def test_usage_error_on_missing_required_flag(self):
        with pytest.raises(SystemExit) as exc:
            main(["mask", "gen", "--nx", "32"])
        assert exc.value.code == 2

    def test_recon_dim_mismatch_exits_1(self, tmp_path, capsys):
        seq = generate(PhantomSpec(n_frames=1))
        vol_path = tmp_path / "a.x"
        save_volume(vol_path, seq.frames[0])
        mask_path = tmp_path / "small.lpsm"
        main(["mask", "gen", "--nx", "16", "--ny", "16", "--rate", "0.5",
              "--out", str(mask_path)])
        capsys.readouterr()
        code = main(["recon", "--input", str(vol_path), "--mask", str(mask_path),
                     "--out", str(tmp_path / "r")])
        assert code == 1
        assert "does not match" in capsys.readouterr().err
