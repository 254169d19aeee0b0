import csv
import io
import subprocess
import sys

import pytest

from molcodec.cli import _ints, build_parser, main
from molcodec.detection import load_calibrations


def run(argv, capsys, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_int_lists():
    assert _ints("100,200") == [100, 200]
    assert _ints("10:30:10") == [10, 20, 30]
    assert _ints("2:4") == [2, 3, 4]


def test_codebook(capsys):
    code, out, _ = run(["codebook", "--alphabet", "alphabet1", "--kind", "mopc,huffman"], capsys)
    assert code == 0
    table = rows(out)
    assert {(r["scheme"], r["symbol"]): r["code"] for r in table}[("mopc", "G")] == "1010"
    assert {(r["scheme"], r["symbol"]): r["code"] for r in table}[("huffman", "A")] == "0"


def test_encode_decode_round_trip(capsys, monkeypatch, tmp_path):
    code, out, _ = run(["encode", "--alphabet", "example", "--scheme", "moac"], capsys, "YZ\n", monkeypatch)
    assert (code, out) == (0, "01000\n")
    words = tmp_path / "words.txt"
    words.write_text("ATTG\nGGCA\n")
    bits = tmp_path / "bits.txt"
    assert main(["encode", "--scheme", "moapc", "-i", str(words), "-o", str(bits)]) == 0
    code, out, _ = run(["decode", "--scheme", "moapc", "--length-hint", "4", "-i", str(bits)], capsys)
    assert (code, out) == (0, "ATTG\nGGCA\n")


def test_decode_errors(capsys, monkeypatch):
    code, _, err = run(["decode", "--scheme", "ac"], capsys, "0101\n", monkeypatch)
    assert code == 2 and "length-hint" in err
    code, _, err = run(["decode", "--scheme", "mopc", "--alphabet", "alphabet2"], capsys, "0110\n", monkeypatch)
    assert code == 1 and "0110" in err


def test_stats_and_normalize(capsys):
    code, out, _ = run(["stats", "--schemes", "uncoded,isi,mopc"], capsys)
    assert code == 0
    assert rows(out)[1] == {"scheme": "isi", "expected_bits": "80.00000", "expected_ones": "20.40000", "exact": "1"}
    code, out, _ = run(["normalize", "--schemes", "uncoded,isi", "--molecules", "100,400"], capsys)
    assert rows(out)[1] == {"scheme": "isi", "signal_interval_ms": "100", "molecule_factor": "0.5098",
                            "molecules_M100": "51", "molecules_M400": "204"}


def test_normalize_reads_config(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("ts = 100\n")
    _, out, _ = run(["normalize", "--schemes", "isi", "--molecules", "100", "--config", str(cfg)], capsys)
    assert rows(out)[0]["signal_interval_ms"] == "50"
    _, out, _ = run(["normalize", "--schemes", "isi", "--molecules", "100", "--config", str(cfg),
                     "--ts", "300"], capsys)
    assert rows(out)[0]["signal_interval_ms"] == "150"


def test_simulate(capsys, tmp_path):
    code, out, _ = run(["simulate", "--bits", "0000", "--ts", "20"], capsys)
    assert code == 0 and [r["count"] for r in rows(out)] == ["0"] * 4
    args = ["simulate", "--bits", "1010", "--ts", "20", "--molecules-per-one", "60", "--seed", "3"]
    assert run(args, capsys)[1] == run(args, capsys)[1]
    code, _, err = run(["simulate", "--bits", "10x"], capsys)
    assert code == 2


def test_calibrate_then_evaluate(capsys, tmp_path):
    ini = tmp_path / "cal.ini"
    common = ["--alphabet", "alphabet2", "--schemes", "mopc", "--molecules", "300",
              "--samples", "50", "--seed", "2", "--pilots", "8"]
    code, out, _ = run(["calibrate", *common, "-o", str(ini)], capsys)
    assert code == 0
    report = rows(out)[0]
    assert report["signal_interval_ms"] == "183" and report["molecules_per_one"] == "300"
    table = load_calibrations(ini)
    assert list(table) == [("mopc", 300)]
    code, out, _ = run(["evaluate", *common, "--words", "8", "--calibration", str(ini)], capsys)
    result = rows(out)[0]
    assert code == 0 and result["words"] == "8"
    assert float(result["a"]) == pytest.approx(table["mopc", 300].a)
    assert 0 <= float(result["ser"]) <= float(result["wer"]) <= 1


def test_curve(capsys):
    code, out, _ = run(["curve", "ratio", "--alphabet", "ratio", "--lengths", "40:80:40",
                        "--samples", "20"], capsys)
    assert code == 0
    got = rows(out)
    assert [r["word_length"] for r in got] == ["40", "80"] and set(got[0]) == {
        "word_length", "length_ratio", "ones_ratio"}


def test_bad_scheme_is_a_usage_error():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["stats", "--schemes", "zip"])


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "molcodec.cli", "codebook", "--kind", "uncoded"],
                         capture_output=True, text=True, check=True).stdout
    assert out.splitlines()[0] == "scheme,symbol,probability,code"
