import json
import shutil
import subprocess
import sys
from importlib import resources

import numpy as np
import pytest

from qpm_lab import cli, compensation, materials, polarization, qpm, spectra


def run_cli(argv, capsys):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_fidelity_prints_nine_significant_digits(capsys):
    code, out, err = run_cli(
        ["fidelity", "--v-hv", "1.0", "--v-plus", "0.954",
         "--v-minus", "0.974"], capsys)
    assert code == 0
    assert out == "0.982000000\n"
    assert err == ""


def test_period_near_reference_value(capsys):
    code, out, _ = run_cli(
        ["period", "--material", "ktp", "--degenerate-nm", "1310",
         "--temp-c", "60"], capsys)
    assert code == 0
    assert float(out) == pytest.approx(54.6, abs=1.0)


def test_period_out_of_range_is_domain_error(capsys):
    code, out, err = run_cli(
        ["period", "--material", "ktp", "--degenerate-nm", "5000",
         "--temp-c", "60"], capsys)
    assert code == 1
    assert out == ""
    assert err.startswith("qpm-lab: error:") and err.count("\n") == 1


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["period", "--degenerate-nm", "1310"])  # missing --temp-c
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["period", "--degenerate-nm", "1310", "--temp-c", "60",
                  "--bogus", "1"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2


def test_index_table_structure(capsys):
    code, out, _ = run_cli(
        ["index", "--material", "ktp", "--axis", "Z", "--min-nm", "1300",
         "--max-nm", "1320", "--step-nm", "10", "--temp-c", "25"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# wavelength_nm,n,k_rad_per_um"
    data = [l for l in lines if not l.startswith("#")]
    assert len(data) == 3
    wl, n, k = (float(x) for x in data[0].split(","))
    assert wl == 1300.0 and 1.0 < n < 3.0
    assert k == pytest.approx(2 * np.pi * n / 1.3, rel=1e-6)
    assert "\r" not in out


def test_spectrum_emits_long_rows_and_pairs(capsys):
    code, out, _ = run_cli(
        ["spectrum", "--material", "ktp", "--pump-nm", "658",
         "--period-um", "54.05", "--length-mm", "10", "--temp-c", "22",
         "--points", "256"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# wavelength_nm,branch,intensity"
    assert any(l.startswith("# phasematched_pairs_nm = ") for l in lines)
    data = [l for l in lines if not l.startswith("#")]
    assert len(data) == 512
    assert {row.split(",")[1] for row in data} == {"Y", "Z"}


def test_scan_crystal_long_format_and_report(capsys):
    base = ["scan-crystal", "--material", "ktp", "--degenerate-nm", "1310",
            "--length-mm", "10", "--t-min", "40", "--t-max", "80",
            "--t-step", "20", "--points", "256"]
    code, out, _ = run_cli(base, capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# temperature_c,wavelength_nm,branch,intensity"
    data = [l for l in lines if not l.startswith("#")]
    assert len(data) == 3 * 256 * 2
    assert any(l.startswith("# plateau_span_c") for l in lines)
    code, out, _ = run_cli(base + ["--report"], capsys)
    lines = out.splitlines()
    assert lines[0] == ("# temperature_c,peak_y_nm,peak_z_nm,"
                        "separation_nm,fwhm_nm")
    assert len([l for l in lines if not l.startswith("#")]) == 3


def test_scan_pump_runs(capsys):
    code, out, _ = run_cli(
        ["scan-pump", "--material", "ktp", "--period-um", "54.05",
         "--length-mm", "10", "--crystal-temp-c", "22",
         "--laser-ref-c", "60.2", "--pump-ref-nm", "664",
         "--rate-nm-per-c", "0.18", "--t-min", "20", "--t-max", "30",
         "--t-step", "5", "--points", "128"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# laser_temperature_c,wavelength_nm,branch,intensity"


def test_compensate_reports_optimum(capsys):
    code, out, _ = run_cli(
        ["compensate", "--pump-nm", "664", "--temp-c", "22",
         "--length-mm", "10"], capsys)
    assert code == 0
    meta = {l.split(" = ")[0][2:]: l.split(" = ")[1]
            for l in out.splitlines() if " = " in l and l.startswith("# ")}
    assert float(meta["compensator_um"]) == pytest.approx(4340.0, abs=150.0)
    assert float(meta["residual_deg"]) <= 0.5


def test_visibility_modes(capsys, tmp_path):
    code, out, _ = run_cli(
        ["visibility", "--mode", "from-extremes", "--rate-max", "102",
         "--rate-min", "2", "--acc-max", "2", "--acc-min", "2"], capsys)
    assert code == 0 and out == "1.00000000\n"

    code, out, _ = run_cli(
        ["visibility", "--mode", "curve", "--v-hv", "1", "--idler-angle-deg",
         "0", "--start-deg", "0", "--stop-deg", "90", "--step-deg", "45"],
        capsys)
    assert code == 0
    data = [l for l in out.splitlines() if not l.startswith("#")]
    assert len(data) == 3
    assert float(data[0].split(",")[1]) == pytest.approx(0.0, abs=1e-12)

    spectrum = tmp_path / "spectrum.csv"
    spectrum.write_text("# wavelength_nm,weight\n1310,1\n1311,1\n1312,1\n")
    phase = tmp_path / "phase.csv"
    phase.write_text("# wavelength_nm,phase_deg\n1310,0\n1311,0\n1312,0\n")
    code, out, _ = run_cli(
        ["visibility", "--mode", "from-phase", "--spectrum-csv",
         str(spectrum), "--phase-csv", str(phase)], capsys)
    assert code == 0 and float(out) == pytest.approx(1.0)

    code, _, err = run_cli(["visibility", "--mode", "from-extremes"], capsys)
    assert code == 1 and "rate-max" in err


def test_json_format(capsys):
    code, out, _ = run_cli(
        ["fidelity", "--v-hv", "1.0", "--v-plus", "0.954", "--v-minus",
         "0.974", "--format", "json"], capsys)
    assert code == 0
    assert json.loads(out) == {"fidelity": 0.982}
    code, out, _ = run_cli(
        ["index", "--material", "ktp", "--axis", "Y", "--min-nm", "1064",
         "--max-nm", "1064", "--temp-c", "25", "--format", "json"], capsys)
    obj = json.loads(out)
    assert obj["columns"] == ["wavelength_nm", "n", "k_rad_per_um"]
    assert len(obj["rows"]) == 1


def test_output_to_file(tmp_path, capsys):
    out_file = tmp_path / "period.txt"
    code, out, _ = run_cli(
        ["period", "--material", "ktp", "--degenerate-nm", "1310",
         "--temp-c", "60", "--out", str(out_file)], capsys)
    assert code == 0 and out == ""
    assert float(out_file.read_text()) == pytest.approx(54.6, abs=1.0)


def test_determinism_byte_identical(capsys):
    argv = ["scan-crystal", "--material", "ktp", "--degenerate-nm", "1310",
            "--length-mm", "10", "--t-min", "40", "--t-max", "60",
            "--t-step", "10", "--points", "128"]
    _, first, _ = run_cli(argv, capsys)
    _, second, _ = run_cli(argv, capsys)
    assert first == second


def test_material_dir_environment(tmp_path, capsys, monkeypatch):
    source = resources.files("qpm_lab").joinpath("data").joinpath("ktp.mat")
    (tmp_path / "custom.mat").write_text(source.read_text(encoding="utf-8"))
    monkeypatch.setenv(cli.MATERIAL_DIR_ENV, str(tmp_path))
    code, out, _ = run_cli(
        ["period", "--material", "custom", "--degenerate-nm", "1310",
         "--temp-c", "60"], capsys)
    assert code == 0
    assert float(out) == pytest.approx(54.6, abs=1.0)


def test_console_script_entry_point():
    exe = shutil.which("qpm-lab")
    if exe is None:
        pytest.skip("console script not installed")
    proc = subprocess.run(
        [exe, "fidelity", "--v-hv", "1", "--v-plus", "0.954",
         "--v-minus", "0.974"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout == "0.982000000\n"


def test_dispatch_covers_every_operation():
    covered = set()
    for ops in cli.DISPATCH.values():
        covered.update(ops)
    assert covered == set(cli.OPERATIONS)
    # every advertised operation exists and is callable
    homes = {
        "load_material": materials.load_material,
        "refractive_index": materials.MaterialModel.refractive_index,
        "wavevector": materials.MaterialModel.wavevector,
        "expanded_length": materials.MaterialModel.expanded_length,
        "idler_wavelength": qpm.idler_wavelength,
        "delta_k": qpm.delta_k,
        "spdc_intensity": qpm.spdc_intensity,
        "solve_poling_period": qpm.solve_poling_period,
        "solve_phasematched_signal": qpm.solve_phasematched_signal,
        "spdc_spectrum": spectra.spdc_spectrum,
        "crystal_temperature_scan": spectra.crystal_temperature_scan,
        "pump_temperature_scan": spectra.pump_temperature_scan,
        "insensitivity_report": spectra.insensitivity_report,
        "pair_phase": compensation.pair_phase,
        "optimize_compensator_length": compensation.optimize_compensator_length,
        "coincidence_curve": polarization.coincidence_curve,
        "visibility_from_extremes": polarization.visibility_from_extremes,
        "visibility_from_phase": polarization.visibility_from_phase,
        "fidelity_from_visibilities": polarization.fidelity_from_visibilities,
    }
    assert set(homes) == set(cli.OPERATIONS)
    for func in homes.values():
        assert callable(func)


def test_subcommand_set_is_exactly_the_contract():
    assert set(cli.DISPATCH) == {"index", "period", "spectrum",
                                 "scan-crystal", "scan-pump", "compensate",
                                 "visibility", "fidelity"}
