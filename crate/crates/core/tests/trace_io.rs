mod common;

use std::io::BufReader;

use aspnav::engine::{solve, SolveConfig};
use aspnav::trace::{
    check_strategy_conformance, read_trace, verify_trace, write_trace, Conformance, Mode, Payload, Trace,
    Verdict, VerifyOptions,
};
use aspnav::{Error, Program, RuleKind, Strategy};
use common::{P1, P2};

fn traced(p: &Program, s: Strategy) -> Trace {
    let mut cfg = SolveConfig::new(s);
    cfg.digests = true;
    solve(p, &cfg).trace
}

#[test]
fn files_round_trip() {
    let p = Program::parse(P1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for s in [Strategy::smodelscc(), Strategy::sup()] {
        let t = traced(&p, s);
        let path = dir.path().join("run.trace");
        let mut f = std::fs::File::create(&path).unwrap();
        write_trace(&t, &mut f).unwrap();
        drop(f);
        let back = read_trace(BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
        assert_eq!(back, t);
    }
}

#[test]
fn record_format_uses_the_documented_field_names() {
    let p = Program::parse(P1).unwrap();
    let text = traced(&p, Strategy::sup()).to_jsonl();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["idx"], 1);
    assert_eq!(lines[0]["rule"], "Decide");
    assert_eq!(lines[0]["lit"], "a");
    assert_eq!(lines[5]["rule"], "BackjumpLP");
    assert_eq!(lines[5]["payload"]["level"], 1);
    assert_eq!(lines[5]["digest"], "a^d c -b -d || {}");
    assert_eq!(lines.last().unwrap()["end"], "semi_terminal");
}

#[test]
fn every_rule_name_parses() {
    for k in RuleKind::ALL {
        let line = format!("{{\"idx\":1,\"rule\":\"{k}\"}}\n");
        assert_eq!(Trace::from_jsonl(&line).unwrap().events[0].rule, k);
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let e = Trace::from_jsonl("{\"idx\":1,\"rule\":\"Decide\",\"lit\":\"a\",\"extra\":0}\n").unwrap_err();
    assert!(matches!(e, Error::TraceRecord { line: 1, .. }), "{e}");
}

#[test]
fn semantic_mode_is_guarded() {
    let text: String = (0..25).map(|i| format!("p{i} :- not q{i}. ")).collect();
    let p = Program::parse(&text).unwrap();
    let t = traced(&p, Strategy::smodelscc());
    assert!(verify_trace(&p, &t, VerifyOptions::default()).unwrap().is_valid());
    let semantic = VerifyOptions { mode: Mode::Semantic, prefix_ok: false };
    assert!(matches!(verify_trace(&p, &t, semantic), Err(Error::TooManyAtoms(50))));
}

#[test]
fn tampering_is_caught() {
    let p = Program::parse(P2).unwrap();
    let t = traced(&p, Strategy::sup());
    let check = |t: &Trace| verify_trace(&p, t, VerifyOptions::default()).unwrap();
    assert!(check(&t).is_valid());

    let mut digest = t.clone();
    digest.events[0].digest = Some("-a^d || {}".into());
    assert!(matches!(check(&digest), Verdict::Invalid { step: 1, .. }));

    let mut idx = t.clone();
    idx.events[1].idx = 7;
    assert!(matches!(check(&idx), Verdict::Invalid { step: 2, .. }));

    let mut clause = t.without_digests();
    let Some(Payload::Backjump { clause: c, .. }) = &mut clause.events[2].payload else { panic!() };
    *c = vec!["-a".into(), "a".into()];
    assert!(matches!(check(&clause), Verdict::Invalid { step: 3, .. }));

    let mut end = t.clone();
    end.end = Some(aspnav::trace::TraceEnd::semi_terminal(&p, &[]));
    assert!(matches!(check(&end), Verdict::Invalid { step: 7, .. }));
}

#[test]
fn traces_after_fail_are_invalid() {
    let p = Program::parse(P2).unwrap();
    let mut t = traced(&p, Strategy::smodelscc()).without_digests();
    let mut extra = t.events.last().unwrap().clone();
    extra.idx += 1;
    t.events.push(extra);
    let v = verify_trace(&p, &t, VerifyOptions::default()).unwrap();
    assert!(matches!(v, Verdict::Invalid { step: 7, ref reason } if reason.contains("FailState")), "{v:?}");
}

#[test]
fn conformance_reports_the_first_offending_step() {
    let p = Program::parse(P1).unwrap();
    let sup = traced(&p, Strategy::sup());
    let Conformance::NonConformant { step, reason } = check_strategy_conformance(&p, &sup, &Strategy::smodelscc())
    else {
        panic!()
    };
    assert_eq!(step, 4);
    assert!(reason.contains("Unfounded"));
    let custom = Strategy::parse("custom:bj+fail,up+arc+bt+bf,d,unf").unwrap();
    assert!(check_strategy_conformance(&p, &sup, &custom).is_conformant());
}
