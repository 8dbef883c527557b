import json

import pytest

from red_sim.cli import main

TOY_CONFIG = {
    "layers": [{"name": "toy3x2", "input": [4, 4, 2], "kernel": [3, 3, 2, 2],
                "stride": 2, "crop": [2, 0, 2, 0]}],
    "seed": 42,
    "channel_scale": 1.0,
}


@pytest.fixture()
def toy_config(tmp_path):
    path = tmp_path / "toy.json"
    path.write_text(json.dumps(TOY_CONFIG), encoding="utf-8")
    return str(path)


def read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


# ---------------------------------------------------------------------------
# list
# ---------------------------------------------------------------------------


def test_list_text(tmp_path, capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    lines = [l for l in out.splitlines() if l.strip()]
    assert len(lines) == 7  # header + six benchmarks
    header = lines[0]
    for col in ("Layer Name", "Network Model", "Dataset", "Input Size",
                "Output Size", "Kernel Size", "Stride"):
        assert col in header
    assert any("FCN_Deconv2" in l and "(568, 568, 21)" in l for l in lines)


def test_list_json(tmp_path):
    out = tmp_path / "list.json"
    assert main(["list", "--format", "json", "--out", str(out)]) == 0
    data = json.loads(read(out))
    assert len(data) == 6
    assert data[0]["layer_name"] == "GAN_Deconv1"
    assert data[5]["output_size"] == [568, 568, 21]


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def test_run_builtins_csv(tmp_path, capsys):
    out = tmp_path / "reports"
    code = main(["run", "--out", str(out), "--channel-scale", str(1 / 128),
                 "--trials", "1", "--designs", "zero_padding,red"])
    assert code == 0
    stdout = capsys.readouterr().out
    assert "all checks passed" in stdout
    assert "reference ranges" in stdout
    summary = read(out / "summary.csv").splitlines()
    assert len(summary) == 1 + 6 * 2  # header + layers x designs
    breakdown = read(out / "breakdown.csv")
    assert breakdown.startswith("design,layer,metric,component,value,normalized")


def test_run_single_design_omits_normalization(tmp_path, capsys):
    out = tmp_path / "reports"
    code = main(["run", "--out", str(out), "--channel-scale", str(1 / 128),
                 "--trials", "1", "--designs", "red"])
    assert code == 0
    rows = read(out / "breakdown.csv").splitlines()[1:]
    assert all(row.endswith(",") for row in rows)  # empty normalized column


def test_run_config_and_json(toy_config, tmp_path, capsys):
    out = tmp_path / "reports"
    code = main(["run", "--config", toy_config, "--out", str(out),
                 "--format", "json", "--trials", "2"])
    assert code == 0
    data = json.loads(read(out / "report.json"))
    assert data["seed"] == 42
    assert [r["layer"] for r in data["reports"]] == ["toy3x2"]
    designs = data["reports"][0]["designs"]
    assert designs["zero_padding"]["normalized"]["latency"] == 1.0
    assert designs["red"]["cycle_count"] == 16
    assert "reference" in data["reports"][0]


def test_run_determinism_byte_identical(toy_config, tmp_path):
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert main(["run", "--config", toy_config, "--out", str(out)]) == 0
        assert main(["run", "--config", toy_config, "--out", str(out),
                     "--format", "json"]) == 0
        outs.append(out)
    assert read(outs[0] / "breakdown.csv") == read(outs[1] / "breakdown.csv")
    assert read(outs[0] / "summary.csv") == read(outs[1] / "summary.csv")
    assert read(outs[0] / "report.json") == read(outs[1] / "report.json")


def test_run_corrupt_config_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"layers": [{"name": "x", "input": [2, 2, 1],
                                           "kernel": [2, 2, 1, 1], "stride": 0}]}),
                   encoding="utf-8")
    assert main(["run", "--config", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "stride" in err


def test_run_env_var_config(toy_config, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("RED_SIM_CONFIG", toy_config)
    assert main(["run", "--trials", "1"]) == 0
    assert "toy3x2" in capsys.readouterr().out


def test_run_equivalence_failure_exit_1(toy_config, monkeypatch, capsys):
    import red_sim.bench as bench_mod

    real = bench_mod.execute

    def broken(plan, schedule, tensor):
        out, trace = real(plan, schedule, tensor)
        bad = out.data.copy()
        bad.flat[0] += 1
        return type(out)(bad), trace

    monkeypatch.setattr(bench_mod, "execute", broken)
    assert main(["run", "--config", toy_config, "--trials", "1"]) == 1
    assert "equivalence failure" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# redundancy
# ---------------------------------------------------------------------------


def test_redundancy_k2s_trend(tmp_path):
    out = tmp_path / "red.csv"
    code = main(["redundancy", "--strides", "2,4,8,16,32", "--kernel-rule", "k2s",
                 "--input-size", "16", "--out", str(out)])
    assert code == 0
    rows = read(out).splitlines()
    assert rows[0] == "stride,kernel,zero_redundancy_ratio"
    ratios = [float(r.split(",")[2]) for r in rows[1:]]
    assert all(a < b for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] >= 0.995


def test_redundancy_hand_case(capsys):
    assert main(["redundancy", "--strides", "2", "--kernel-rule", "fixed",
                 "--kernel-size", "2", "--input-size", "2"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[1] == "2,2,0.75"


def test_redundancy_stride1_full_crop(capsys):
    assert main(["redundancy", "--strides", "1", "--kernel-rule", "fixed",
                 "--kernel-size", "3", "--input-size", "8",
                 "--crop-mode", "full"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "1,3,0.0"


def test_redundancy_rejects_bad_rule(capsys):
    assert main(["redundancy", "--strides", "2", "--kernel-rule", "fixed"]) == 2
    assert "kernel-size" in capsys.readouterr().err


def test_redundancy_rejects_bad_strides(capsys):
    assert main(["redundancy", "--strides", "2,x"]) == 2
    assert main(["redundancy", "--strides", "0"]) == 2


# ---------------------------------------------------------------------------
# dump-schedule
# ---------------------------------------------------------------------------


def test_dump_schedule_toy_red(toy_config, tmp_path):
    out = tmp_path / "sched.txt"
    code = main(["dump-schedule", "--layer", "toy3x2", "--design", "red",
                 "--config", toy_config, "--out", str(out)])
    assert code == 0
    lines = [l for l in read(out).splitlines() if not l.startswith("#")]
    cycle0_assign = [l for l in lines if l.startswith("0,") and "pixel" in l]
    assert len(cycle0_assign) == 9
    from collections import Counter
    pix = Counter(tuple(l.split(",")[3:5]) for l in cycle0_assign)
    assert sorted(pix.values()) == [1, 2, 2, 4]


def test_dump_schedule_zero_padding_builtin(tmp_path):
    out = tmp_path / "zp.txt"
    code = main(["dump-schedule", "--layer", "GAN_Deconv3", "--design",
                 "zero_padding", "--out", str(out)])
    assert code == 0
    lines = [l for l in read(out).splitlines() if not l.startswith("#")]
    assigns = [l for l in lines if ",window," in l]
    assert len(assigns) == 64  # 8x8 output, one window per cycle


def test_dump_schedule_repeat_identical(toy_config, tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    args = ["dump-schedule", "--layer", "toy3x2", "--design", "red_folded",
            "--config", toy_config]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert read(a) == read(b)


def test_dump_schedule_unknown_design(capsys):
    assert main(["dump-schedule", "--layer", "GAN_Deconv1", "--design", "fast"]) == 2
    assert "unknown design" in capsys.readouterr().err


def test_dump_schedule_unknown_layer(capsys):
    assert main(["dump-schedule", "--layer", "nope", "--design", "red"]) == 2
    assert "unknown layer" in capsys.readouterr().err
