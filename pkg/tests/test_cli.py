from kglogic.cli import main

U_STRUCTURE = "h\tR1\tc\nc\tR2\tz2\nz2\tR4\tt\nc\tR3\tz3\nz3\tR5\tt\n"
UPRIME = "(<R4>=1 <R2>=1 (<R1>=1 @h & @c) & <R5>=1 <R3>=1 (<R1>=1 @h & @c))\n"


def test_compile_chain(tmp_path, capsys):
    formula = tmp_path / "c.cml"
    formula.write_text("<R3>=1 <R2>=1 <R1>=1 @h\n")
    out = tmp_path / "c.net"
    code = main(["compile", "--formula", str(formula), "--out", str(out)])
    assert code == 0
    text = out.read_text()
    assert "dim\t4" in text
    assert "Case 3" in capsys.readouterr().out


def test_check_fork_join(tmp_path, capsys):
    kg = tmp_path / "u.tsv"
    kg.write_text(U_STRUCTURE)
    formula = tmp_path / "uprime.cml"
    formula.write_text(UPRIME)
    code = main(
        ["check", "--kg", str(kg), "--formula", str(formula), "--bind", "h=h,c=c"]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "t\t1" in out.split("\n")
    assert all(
        line.endswith("\t0")
        for line in out.split("\n")
        if line and not line.startswith("#") and not line.startswith("t\t")
    )


def test_run_engine_matches_check(tmp_path, capsys):
    kg = tmp_path / "u.tsv"
    kg.write_text(U_STRUCTURE)
    formula = tmp_path / "uprime.cml"
    formula.write_text(UPRIME)
    args = ["--kg", str(kg), "--formula", str(formula), "--bind", "h=h,c=c"]
    assert main(["check"] + args) == 0
    check_lines = [
        line
        for line in capsys.readouterr().out.split("\n")
        if line and not line.startswith("#")
    ]
    assert main(["run"] + args + ["--labeling", "none"]) == 0
    run_lines = [
        line
        for line in capsys.readouterr().out.split("\n")
        if line and not line.startswith("#")
    ]
    assert check_lines == run_lines


def test_missing_kg_is_data_error(tmp_path, capsys):
    formula = tmp_path / "f.cml"
    formula.write_text("top\n")
    code = main(["run", "--kg", str(tmp_path / "missing.tsv"),
                 "--formula", str(formula), "--labeling", "none"])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(capsys):
    assert main(["gen", "--bogus"]) == 1


def test_unknown_subcommand_is_usage_error(capsys):
    assert main(["frobnicate"]) == 1


def test_malformed_formula_is_data_error(tmp_path, capsys):
    kg = tmp_path / "k.tsv"
    kg.write_text("a\tR1\tb\n")
    formula = tmp_path / "f.cml"
    formula.write_text("(P(a) &\n")
    code = main(["check", "--kg", str(kg), "--formula", str(formula)])
    assert code == 2


def test_gen_run_bisim_report_flow(tmp_path, capsys):
    data = tmp_path / "udata"
    code = main(
        ["gen", "--relation", "U", "--instances", "10", "--noise", "20",
         "--seed", "5", "--decoys", "--out", str(data)]
    )
    assert code == 0
    capsys.readouterr()
    for name in ("triples.tsv", "targets_test.tsv", "ground.tsv", "config.txt"):
        assert (data / name).exists()

    code = main(["run", "--data", str(data), "--labeling", "el", "--degree", "1"])
    assert code == 0
    out = capsys.readouterr().out
    assert "metric\thit@1\t1.0" in out

    kg = tmp_path / "udata" / "triples.tsv"
    code = main(
        ["bisim", "--kg", str(kg), "--labeling", "query", "--bind", "h=u0_h",
         "--rounds", "3"]
    )
    assert code == 0
    lines = [
        line
        for line in capsys.readouterr().out.split("\n")
        if line and not line.startswith("#")
    ]
    assert all(len(line.split("\t")) == 3 for line in lines)

    code = main(["report", "--data", str(data)])
    assert code == 0
    out = capsys.readouterr().out
    assert "relation\tera\tql\tel" in out
    row = [line for line in out.split("\n") if line.startswith("U\t")][0]
    assert row.split("\t")[3] == "1.0"  # el column


def test_outputs_to_directory(tmp_path):
    data = tmp_path / "cdata"
    assert main(
        ["gen", "--relation", "C", "--instances", "5", "--noise", "10",
         "--seed", "1", "--out", str(data)]
    ) == 0
    outdir = tmp_path / "results"
    assert main(
        ["run", "--data", str(data), "--labeling", "query", "--out", str(outdir)]
    ) == 0
    report = (outdir / "report.txt").read_text()
    assert "metric\thit@1\t1.0" in report
    assert report.startswith("#")


def test_bisim_labeling_none(tmp_path, capsys):
    kg = tmp_path / "k.tsv"
    kg.write_text("a\tR1\tb\n")
    assert main(["bisim", "--kg", str(kg), "--rounds", "2"]) == 0
    out = capsys.readouterr().out
    assert "0\ta\t0" in out
