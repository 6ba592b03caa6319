//! End-to-end runs of the `mpqed` binary.
//!
//! Golden files live in `tests/golden/`; run with `UPDATE_GOLDEN=1` to
//! rewrite them after an intended output change.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_mpqed");

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(rel)
}

fn system(name: &str) -> String {
    data(&format!("systems/{name}.toml")).display().to_string()
}

fn reference(name: &str, variant: &str) -> String {
    data(&format!("references/{name}.{variant}.ref"))
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn mpqed")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e} (run with UPDATE_GOLDEN=1)", path.display()));
    assert!(
        want == actual,
        "{name} differs from the golden file:\n{actual}"
    );
}

#[test]
fn verify_exit_codes() {
    for name in ["hydrogen", "helium", "lithium"] {
        let ok = run(&[
            "verify",
            "--system",
            &system(name),
            "--reference",
            &reference(name, "oracle"),
        ]);
        assert_eq!(code(&ok), 0, "{name} oracle:\n{}", stdout(&ok));
        assert!(stdout(&ok).contains("0 discrepancy"));
        let bad = run(&[
            "verify",
            "--system",
            &system(name),
            "--reference",
            &reference(name, "as-printed"),
        ]);
        assert_eq!(code(&bad), 1, "{name} as-printed:\n{}", stdout(&bad));
    }
}

#[test]
fn verify_reports_the_lithium_row_typo() {
    let out = run(&[
        "verify",
        "--system",
        &system("lithium"),
        "--reference",
        &reference("lithium", "as-printed"),
    ]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    let row = lines
        .iter()
        .position(|l| l.trim() == "position-row 3: discrepancy")
        .expect("row 3 item");
    let r3 = (row..lines.len())
        .find(|&i| {
            lines[i]
                .split_whitespace()
                .eq(["coefficient-mismatch", "(R", "3)"])
        })
        .expect("R3 term");
    assert!(lines[r3 + 1].trim_end().ends_with("residual 4/3"), "{text}");
}

#[test]
fn errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let malformed = dir.path().join("bad.ref");
    std::fs::write(
        &malformed,
        "(reference (system hydrogen)\n(grade 1 (dot (R 2)",
    )
    .unwrap();
    let out = run(&[
        "verify",
        "--system",
        &system("hydrogen"),
        "--reference",
        malformed.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let wrong = dir.path().join("wrong.ref");
    std::fs::write(
        &wrong,
        "(reference (system helium))\n(grade 1 (dot (R 2) (R 2)))\n",
    )
    .unwrap();
    let out = run(&[
        "verify",
        "--system",
        &system("hydrogen"),
        "--reference",
        wrong.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);

    assert_eq!(code(&run(&["expand", "--system", "no/such/file.toml"])), 2);
    assert_eq!(
        code(&run(&[
            "expand",
            "--system",
            &system("hydrogen"),
            "--order",
            "0"
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "expand",
            "--system",
            &system("hydrogen"),
            "--scheme",
            "xx"
        ])),
        2
    );
    let out = run(&["verify", "--system", &system("hydrogen")]);
    assert_eq!(code(&out), 2, "no reference given");
}

#[test]
fn output_is_deterministic() {
    let args = ["expand", "--system", &system("helium"), "--format", "both"];
    let first = run(&args);
    assert_eq!(code(&first), 0);
    for _ in 0..2 {
        assert_eq!(run(&args).stdout, first.stdout);
    }
}

#[test]
fn expand_output_verifies_against_itself() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["hydrogen", "helium", "lithium"] {
        for scheme in ["mp", "mc"] {
            let out = run(&[
                "expand",
                "--system",
                &system(name),
                "--scheme",
                scheme,
                "--format",
                "canonical",
            ]);
            assert_eq!(code(&out), 0);
            let path = dir.path().join(format!("{name}.{scheme}.ref"));
            std::fs::write(&path, &out.stdout).unwrap();
            let check = run(&[
                "verify",
                "--system",
                &system(name),
                "--scheme",
                scheme,
                "--reference",
                path.to_str().unwrap(),
            ]);
            assert_eq!(code(&check), 0, "{name} {scheme}:\n{}", stdout(&check));
        }
    }
}

#[test]
fn golden_expansions() {
    for name in ["hydrogen", "helium", "lithium"] {
        let out = run(&["expand", "--system", &system(name), "--format", "canonical"]);
        assert_eq!(code(&out), 0);
        golden(&format!("expand-{name}.txt"), &stdout(&out));
    }
    let out = run(&[
        "expand",
        "--system",
        &system("hydrogen"),
        "--order",
        "2",
        "--format",
        "latex",
    ]);
    golden("expand-hydrogen-latex.txt", &stdout(&out));
    let out = run(&[
        "expand",
        "--system",
        &system("hydrogen"),
        "--order",
        "2",
        "--scheme",
        "mc",
    ]);
    golden("expand-hydrogen-mc.txt", &stdout(&out));
}

#[test]
fn golden_jacobi_and_scale() {
    for name in ["hydrogen", "helium", "lithium"] {
        let out = run(&["jacobi", "--system", &system(name), "--format", "both"]);
        assert_eq!(code(&out), 0, "{name}");
        let text = stdout(&out);
        assert_eq!(text.matches(": ok").count(), 4, "{text}");
        golden(&format!("jacobi-{name}.txt"), &text);
    }
    let out = run(&["scale", "--system", &system("lithium"), "--format", "both"]);
    assert_eq!(code(&out), 0);
    golden("scale-lithium.txt", &stdout(&out));
}

#[test]
fn self_energy_is_opt_in() {
    let base = [
        "expand",
        "--system",
        &system("hydrogen"),
        "--order",
        "1",
        "--format",
        "canonical",
    ];
    let without = stdout(&run(&base));
    let mut args = base.to_vec();
    args.push("--include-self-energy");
    let with = stdout(&run(&args));
    assert!(!without.contains("self"));
    assert!(with.contains("families: E0 self0"), "{with}");
}

#[test]
fn print_renders_a_reference_file() {
    let out = run(&[
        "print",
        "--system",
        &system("hydrogen"),
        "--format",
        "latex",
        &reference("hydrogen", "oracle"),
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(
        text.lines()
            .any(|l| l == r"W^{1} = -e R_{2}\cdot E(\alpha R_{1})"),
        "{text}"
    );

    let dir = tempfile::tempdir().unwrap();
    let forms = dir.path().join("forms.txt");
    std::fs::write(&forms, "(+ (R 1) (R 1))\n(/ m1 (+ m1 m2))\n").unwrap();
    let out = run(&[
        "print",
        "--system",
        &system("hydrogen"),
        "--format",
        "canonical",
        forms.to_str().unwrap(),
    ]);
    assert_eq!(stdout(&out), "(* 2 (R 1))\n(/ m1 (+ m1 m2))\n");
}
