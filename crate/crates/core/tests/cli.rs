use std::path::PathBuf;
use std::process::{Command, Output};

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eds-waves")).args(args).output().expect("binary runs")
}

fn tmp(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("eds-waves-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn report(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn bundled_documents_pass_and_are_deterministic() {
    for doc in [
        "kdv_a.json",
        "kdv_b.json",
        "linear_dispersion.json",
        "linear_dispersion_symmetries.json",
        "transport_failure.json",
    ] {
        let p = example(doc);
        let a = run(&["run", p.to_str().unwrap()]);
        let b = run(&["run", p.to_str().unwrap()]);
        assert_eq!(a.status.code(), Some(0), "{doc}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{doc} not byte-identical");
    }
}

#[test]
fn kdv_reduction_report() {
    let out = run(&["run", example("kdv_a.json").to_str().unwrap()]);
    let r = report(&out);
    assert_eq!(r["schema"], "eds-waves/report@1");
    assert_eq!(r["reduction"]["f_tilde"], "-u_xxx*c/(u - c)");
    assert_eq!(r["integrability"]["frobenius"], true);
    assert_eq!(r["integrability"]["closed"], true);
    assert_eq!(r["integrability"]["agreement"]["holds"], true);
}

#[test]
fn linear_dispersion_report() {
    let r = report(&run(&["run", example("linear_dispersion.json").to_str().unwrap()]));
    let integrals = r["integrals"].as_array().unwrap();
    assert_eq!(integrals.len(), 3);
    assert!(integrals.iter().all(|i| i["annihilated"]["holds"] == true));
    assert_eq!(integrals[0]["quadrature"]["holds"], true);
    assert_eq!(integrals[1]["quadrature"]["holds"], true);
    assert!(integrals[2].get("quadrature").is_none());
    assert_eq!(r["structure"]["solvable"]["holds"], false);
    assert_eq!(r["structure"]["witness"], "(c)*X2 + (1)*X1");
}

#[test]
fn transport_failure_agrees() {
    let r = report(&run(&["run", example("transport_failure.json").to_str().unwrap()]));
    let i = &r["integrability"];
    assert_eq!(i["frobenius"], false);
    assert_eq!(i["criterion"]["frobenius"]["holds"], false);
    assert_eq!(i["agreement"]["holds"], true);
}

#[test]
fn exit_codes() {
    let wrong = r#"{"schema":"eds-waves/problem@1","pde":{"order":3,"F":"u_xxx","params":["c"],"wave_speed":"c",
        "expect":{"frobenius":false,"closed":true}}}"#;
    assert_eq!(run(&["run", tmp("wrong.json", wrong).to_str().unwrap()]).status.code(), Some(1));
    let bad_integral = r#"{"schema":"eds-waves/problem@1","pde":{"order":3,"F":"u_xxx","params":["c"],"wave_speed":"c"},
        "candidates":{"first_integrals":[{"name":"g","expr":"u"}]}}"#;
    assert_eq!(run(&["run", tmp("bad.json", bad_integral).to_str().unwrap()]).status.code(), Some(1));
    let syntax = r#"{"schema":"eds-waves/problem@1","pde":{"order":3,"F":"u_xxx +","params":["c"],"wave_speed":"c"}}"#;
    assert_eq!(run(&["run", tmp("syntax.json", syntax).to_str().unwrap()]).status.code(), Some(2));
    let schema = r#"{"schema":"eds-waves/problem@0","pde":{"order":3,"F":"u_xxx","params":["c"],"wave_speed":"c"}}"#;
    assert_eq!(run(&["run", tmp("schema.json", schema).to_str().unwrap()]).status.code(), Some(2));
    let unknown = r#"{"schema":"eds-waves/problem@1","pde":{"order":3,"F":"u_xxx","params":["c"],"wave_speed":"c","extra":1}}"#;
    assert_eq!(run(&["run", tmp("unknown.json", unknown).to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["run", "/nonexistent/doc.json"]).status.code(), Some(2));
    let p = example("kdv_a.json");
    assert_eq!(run(&["run", p.to_str().unwrap(), "--only", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["run", p.to_str().unwrap(), "--grid", "10"]).status.code(), Some(2));
    let nonaffine = r#"{"schema":"eds-waves/problem@1","pde":{"order":3,"F":"u_x^2 + u_xxx","params":["c"],"wave_speed":"c"}}"#;
    let out = run(&["run", tmp("nonaffine.json", nonaffine).to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["errors"][0]["stage"], "reduce");
}

#[test]
fn flags() {
    let p = example("kdv_b.json");
    let out = run(&["run", p.to_str().unwrap(), "--only", "numeric", "--grid", "21,11", "--tol", "1e-6", "--convention", "pinned"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["stages"], serde_json::json!(["numeric"]));
    assert_eq!(r["convention"], "pinned");
    assert!(r.get("integrability").is_none());
    assert_eq!(r["numeric"][0]["grid"]["nodes"], 231);
    assert_eq!(r["numeric"][0]["tol"], 1e-6);
}

#[test]
fn explain_renders_verdicts() {
    let out = run(&["run", example("linear_dispersion.json").to_str().unwrap()]);
    let rp = tmp("report.json", std::str::from_utf8(&out.stdout).unwrap());
    let text = run(&["explain", rp.to_str().unwrap()]);
    assert_eq!(text.status.code(), Some(0));
    let text = String::from_utf8(text.stdout).unwrap();
    assert!(text.contains("transport: F_t + c*F_x = 0"));
    assert!(text.contains("sub-top: dF/du_xx = 0"));
    assert!(text.contains("kernel witness: (c)*X2 + (1)*X1"));

    let out = run(&["run", example("kdv_b.json").to_str().unwrap()]);
    let rp = tmp("report_b.json", std::str::from_utf8(&out.stdout).unwrap());
    let text = String::from_utf8(run(&["explain", rp.to_str().unwrap()]).stdout).unwrap();
    assert!(text.contains("density T3: tier tw-flux-trivial"));
    assert!(text.contains("integral f2_printed"));

    let bad = tmp("bad_report.json", "{\"schema\": 3}");
    assert_eq!(run(&["explain", bad.to_str().unwrap()]).status.code(), Some(2));
}
