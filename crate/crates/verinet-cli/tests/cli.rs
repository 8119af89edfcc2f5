use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn model(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "models", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verinet")).args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_verinet"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn temp(name: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join(format!("verinet-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn pfa_eval_example() {
    let o = run(&["pfa", "eval", &model("example.json"), "ab"]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "2/3"));
}

#[test]
fn sorted_example_pipes_into_classify() {
    let built = run(&["tf", "build-example", "sorted"]);
    assert_eq!(code(&built), 0);
    let sorted = run_stdin(&["tf", "classify", "-", "1 2 3"], &built.stdout);
    assert_eq!(stdout(&sorted).trim(), "1");
    let unsorted = run_stdin(&["tf", "classify", "-", "1 3 2"], &built.stdout);
    assert_eq!(stdout(&unsorted).trim(), "0");
}

#[test]
fn reduce_three_clause_cnf_is_sat() {
    let o = run(&["reduce", "3sat", &model("three_clauses.cnf"), "--solve"]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "SAT"));
    let unsat = temp("unsat.cnf", "p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n");
    let o = run(&["reduce", "3sat", &unsat, "--solve"]);
    assert_eq!((code(&o), stdout(&o).trim()), (1, "UNSAT"));
}

#[test]
fn check_max_spec_with_both_engines() {
    let o = run(&["check", &model("max.nnl"), "--model", &format!("N={}", model("max.json")), "--engine", "both"]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "true"));
}

#[test]
fn injectivity_fails_for_max() {
    for engine in ["automata", "exists"] {
        let o = run(&["check", &model("injective.nnl"), "--model", &format!("N={}", model("max.json")), "--engine", engine]);
        assert_eq!((code(&o), stdout(&o).trim()), (1, "false"), "{engine}");
    }
}

#[test]
fn errors_exit_with_two() {
    let missing = run(&["check", &model("max.nnl")]);
    assert_eq!(code(&missing), 2);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("not bound"));
    let garbage = temp("bad.nnl", "forall x. x <=\n");
    assert_eq!(code(&run(&["check", &garbage])), 2);
    let dialect = temp("neg.elra", "exists x. !(x <= 1)\n");
    assert_eq!(code(&run(&["solve", &dialect, "--dialect", "exists-lra"])), 2);
    assert_eq!(code(&run(&["pfa", "eval", &model("example.json"), "abc"])), 2);
    assert_eq!(code(&run(&["no-such-command"])), 2);
}

#[test]
fn json_reports_are_deterministic() {
    let args = ["--json", "solve", &model("linear.elra"), "--witness"];
    let a = stdout(&run(&args));
    assert_eq!(a, stdout(&run(&args)));
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["command"], "solve");
    assert_eq!(v["result"], "sat");
    assert_eq!(v["witness"]["x"], "2");
    assert_eq!(v["witness"]["y"], "1");
    assert!(v["inputs_digest"].as_str().unwrap().starts_with("sha256:"));
    assert!(v.get("wall_time_ms").is_none());
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["command", "inputs_digest", "result", "witness"]);
}

#[test]
fn results_do_not_depend_on_jobs() {
    let net = format!("N={}", model("max.json"));
    let one = stdout(&run(&["--json", "--jobs", "1", "check", &model("max.nnl"), "--model", &net]));
    let four = stdout(&run(&["--json", "--jobs", "4", "check", &model("max.nnl"), "--model", &net]));
    assert_eq!(one, four);
}

#[test]
fn automaton_round_trip() {
    let phi = temp("unit.lra", "0 <= x && x <= 1\n");
    let built = run(&["automaton", "build", &phi, "--dialect", "lra"]);
    assert_eq!(code(&built), 0);
    let dump = stdout(&built);
    assert!(dump.starts_with("buchi k=1"));
    let file = temp("unit.aut", &dump);
    assert_eq!(stdout(&run(&["automaton", "dump", &file])), dump);
    let witness = run(&["--json", "automaton", "witness", &phi, "--dialect", "lra"]);
    let v: serde_json::Value = serde_json::from_slice(&witness.stdout).unwrap();
    let x: String = v["witness"]["x"].as_str().unwrap().into();
    assert!(x == "0" || x == "1" || x.contains('/'), "{x}");
    let sentence = temp("dense.lra", "forall x. forall y. (x < y => exists z. (x < z && z < y))\n");
    assert_eq!(code(&run(&["automaton", "decide", &sentence, "--dialect", "lra"])), 0);
}

#[test]
fn pfa_pipeline() {
    let ex = model("example.json");
    let comp = temp("comp.json", &stdout(&run(&["pfa", "closure", "complement", &ex])));
    assert_eq!(stdout(&run(&["pfa", "eval", &comp, "ab"])).trim(), "1/3");
    let convex = temp("convex.json", &stdout(&run(&["pfa", "closure", "convex", &ex, &comp, "--p", "1/4"])));
    assert_eq!(stdout(&run(&["pfa", "eval", &convex, "ab"])).trim(), "5/12");
    let letter = temp("letter.json", &stdout(&run(&["pfa", "letterize", &ex])));
    assert_eq!(stdout(&run(&["pfa", "eval", &letter, "abb"])).trim(), "1/3");
    let rnn = temp("rnn.json", &stdout(&run(&["pfa", "to-rnn", &ex, "--theta", "1/2"])));
    let member = run(&["rnn", "classify", &rnn, "ab", "--alphabet", "a,b", "--theta", "1/2"]);
    assert_eq!((code(&member), stdout(&member).trim()), (0, "true"));
    let outside = run(&["rnn", "classify", &rnn, "abb", "--alphabet", "a,b", "--theta", "1/2"]);
    assert_eq!(code(&outside), 1);
    let pcp = temp("pcp.json", &stdout(&run(&["pfa", "pcp", "--f1", "10,0", "--f2", "1,00"])));
    assert_eq!(stdout(&run(&["pfa", "eval", &pcp, "ab"])).trim(), "1/2");
}

#[test]
fn heaviside_emptiness_reports_a_member() {
    // h' = H(x_b), output h: accepts any word ending in b.
    let rnn = r#"{"type":"rnn",
        "input":{"weights":[["0","0","1"]],"bias":["0"],"activation":"heaviside"},
        "output":{"weights":[["1"]],"bias":["0"],"activation":"id"},
        "h0":["0"]}"#;
    let file = temp("h.json", rnn);
    let o = run(&["rnn", "empty-heaviside", &file, "--alphabet", "a,b", "--theta", "1"]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o).lines().collect::<Vec<_>>(), ["false", "[\"b\"]"]);
}

#[test]
fn argmax_example_runs() {
    let built = run(&["tf", "build-example", "argmax"]);
    let o = run_stdin(&["tf", "run", "-", "3 1 4 1"], &built.stdout);
    assert_eq!(stdout(&o).trim(), "0 0 1 0");
    let dyck = run(&["tf", "build-example", "dyck"]);
    let o = run_stdin(&["tf", "classify", "-", "<<>><>", "--alphabet", "<,>", "--rel", "=", "--theta", "0"], &dyck.stdout);
    assert_eq!(code(&o), 0);
}
