//! Acceptance checks, one line per criterion. Run with
//! `cargo test -p livediag-server --test acceptance`.

mod common;
#[path = "../../core/tests/common/edit_oracle.rs"]
mod edit_oracle;
#[path = "../../core/tests/common/layout_props.rs"]
mod layout_props;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::fuzz::{exchange, message};
use common::{delayed, position, start, stats, URI};
use edit_oracle::{begin, canvas_connections, canvas_elements, check_move_round_trip, check_predictions, corpus, corpus_dir, render};
use livediag_core::edit::{apply_prediction, AnchorEnd, InteractionKind, InteractionParams};
use livediag_core::pipeline::compile;
use livediag_core::render::RenderNode;
use livediag_core::samples::{layout_dependent_program, scale_program};
use livediag_core::uml::{operator_markers, OPERATORS};
use livediag_server::ServerConfig;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use serde_json::json;

type Outcome = Result<String, String>;

/// Movable canvas elements of a corpus file.
fn movable(text: &str) -> Vec<String> {
    canvas_elements(&compile(text))
        .into_iter()
        .filter(|id| begin(text, id, InteractionKind::MoveElement, AnchorEnd::Start).is_some())
        .collect()
}

fn round_trip() -> Outcome {
    let files = corpus();
    if files.len() < 20 {
        return Err(format!("corpus has {} diagrams, need 20", files.len()));
    }
    let fixed = [(10.0, 0.0), (25.0, -5.0), (-40.0, 17.0), (50.0, 25.0)];
    let mut moved = 0;
    for (name, text) in &files {
        for id in movable(text) {
            check_move_round_trip(text, &id, &fixed).map_err(|e| format!("{name}: {e}"))?;
            moved += 1;
        }
    }
    // random sequences; quarters keep literal sums exact
    let steps = prop::collection::vec((-2000i32..2000, -2000i32..2000), 1..8)
        .prop_map(|v| v.into_iter().map(|(x, y)| (x as f64 / 4.0, y as f64 / 4.0)).collect::<Vec<_>>());
    let mut runner = TestRunner::new(Config { cases: 300, failure_persistence: None, ..Config::default() });
    runner
        .run(&(0..files.len(), 0usize..1000, steps), |(f, e, steps)| {
            let (name, text) = &files[f];
            let ids = movable(text);
            if ids.is_empty() {
                return Ok(());
            }
            check_move_round_trip(text, &ids[e % ids.len()], &steps).map_err(|e| TestCaseError::fail(format!("{name}: {e}")))
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{} diagrams, {moved} elements on a fixed path, 300 random sequences", files.len()))
}

fn prediction() -> Outcome {
    let files = corpus();
    let paths = [
        vec![(30.0, 0.0), (60.0, 12.5), (-20.0, 40.0)],
        vec![(-7.25, 3.5), (100.0, -80.0), (0.0, 0.0), (45.5, 45.5)],
    ];
    let mut checked = 0;
    for (name, text) in &files {
        for id in movable(text) {
            for (k, path) in paths.iter().enumerate() {
                let params: Vec<_> = path.iter().map(|&(dx, dy)| InteractionParams::translate(dx, dy)).collect();
                let renders: Vec<usize> = (0..params.len()).filter(|i| i % (k + 1) == 0).collect();
                check_predictions(text, &id, InteractionKind::MoveElement, &params, &renders).map_err(|e| format!("{name} {id}: {e}"))?;
                checked += params.len();
            }
        }
    }
    // counterexample: B's position depends on A's measured x
    let text = layout_dependent_program();
    let start = render(&text);
    let mut session = begin(&text, "canvas0/canvasElement0", InteractionKind::MoveElement, AnchorEnd::Start).ok_or("counterexample not movable")?;
    let out = session.update(InteractionParams::translate(100.0, 0.0)).map_err(|e| e.to_string())?;
    let mut predicted = start.clone();
    apply_prediction(&mut predicted, &out.delta);
    let b = "canvas0/canvasElement1";
    let (before, guess) = (start.root.find(b).unwrap().y, predicted.root.find(b).unwrap().y);
    let full = render(&out.document.text).root.find(b).unwrap().y;
    if guess != before || full == guess {
        return Err(format!("counterexample: B at {before}, predicted {guess}, full render {full}"));
    }
    // the server's next full update replaces the wrong guess
    let (_s, mut c) = start_server(ServerConfig::default());
    common::open(&mut c, &text);
    c.request("interaction/start", json!({ "uri": URI, "elementId": "canvas0/canvasElement0", "kind": "moveElement" })).map_err(|e| e.0.to_string())?;
    let v = c.request("interaction/update", json!({ "uri": URI, "params": { "dx": 100 } })).map_err(|e| e.0.to_string())?["version"].clone();
    let inc = c.wait_for("diagram/incremental", |_| true).ok_or("no incremental")?;
    if inc["params"]["deltas"]["elements"].as_array().is_some_and(|e| e.iter().any(|d| d["id"] == b)) {
        return Err("B was predicted to move".into());
    }
    let update = c.wait_for("diagram/update", |p| p["version"] == v).ok_or("no full update")?;
    let shown = position(&update["params"], b).1;
    if shown != full {
        return Err(format!("full update shows B at {shown}, expected {full}"));
    }
    Ok(format!("{checked} corpus predictions exact; counterexample predicted y={guess}, overwritten by full y={full}"))
}

fn start_server(config: ServerConfig) -> (livediag_server::Server, livediag_server::Client<livediag_server::Connection>) {
    start(config)
}

fn scheduler_law() -> Outcome {
    let (_s, mut c) = start_server(delayed(15));
    common::open(&mut c, common::TWO_CLASSES);
    c.request("interaction/start", json!({ "uri": URI, "elementId": "canvas0/canvasElement0", "kind": "moveElement" })).map_err(|e| e.0.to_string())?;
    let mut worst = 0;
    for i in 1..=100 {
        c.request("interaction/update", json!({ "uri": URI, "params": { "dx": i, "dy": i / 2 } })).map_err(|e| e.0.to_string())?;
        worst = worst.max(stats(&mut c)["inFlight"].as_u64().unwrap());
    }
    c.request("interaction/end", json!({ "uri": URI })).map_err(|e| e.0.to_string())?;
    let version = stats(&mut c)["version"].clone();
    let update = c.wait_for("diagram/update", |p| p["version"] == version).ok_or("no final update")?;
    let s = stats(&mut c);
    let at = position(&update["params"], "canvas0/canvasElement0");
    if worst > 1 || s["maxInFlight"] != 1 {
        return Err(format!("{} executions in flight", s["maxInFlight"]));
    }
    if at != (200.0, 250.0) {
        return Err(format!("final update places A at {at:?}, expected (200, 250)"));
    }
    Ok(format!("100 updates, {} executions started, {} coalesced, max 1 in flight, final at {at:?}", s["started"], s["coalesced"]))
}

fn determinism() -> Outcome {
    let golden_dir = corpus_dir().join("golden");
    let mut files = 0;
    for (name, text) in corpus() {
        let a = compile(&text).svg().ok_or(format!("{name}: no svg"))?;
        let b = compile(&text).svg().ok_or(format!("{name}: no svg"))?;
        if a != b {
            return Err(format!("{name}: two runs differ"));
        }
        let golden = std::fs::read_to_string(golden_dir.join(name.replace(".diagram", ".svg"))).map_err(|e| format!("{name}: {e}"))?;
        if a != golden {
            return Err(format!("{name}: differs from the committed SVG"));
        }
        files += 1;
    }
    // a separate process must agree too
    let (name, text) = &corpus()[19];
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_livediag"))
        .args(["render", corpus_dir().join(name).to_str().unwrap()])
        .output()
        .map_err(|e| e.to_string())?;
    if out.stdout != compile(text).svg().unwrap().as_bytes() {
        return Err(format!("{name}: CLI output differs"));
    }
    Ok(format!("{files} files byte-identical across runs, a separate process and the committed SVGs on {}", std::env::consts::OS))
}

fn layout_properties() -> Outcome {
    use layout_props::*;
    let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
    runner
        .run(&(tree_strategy(), constraints_strategy(), -5000i32..5000, -5000i32..5000), |(t, c, dx, dy)| {
            check_tree(&t, c, dx, dy).map_err(TestCaseError::fail)
        })
        .map_err(|e| format!("trees: {e}"))?;
    runner
        .run(&canvas_strategy(), |case| check_anchors(&case).map_err(TestCaseError::fail))
        .map_err(|e| format!("anchors: {e}"))?;
    Ok("1000 trees (constraints, containment, additivity, translation), 1000 anchor cases".into())
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

fn scale() -> Outcome {
    let text = scale_program();
    let compiled = compile(&text);
    let lines = text.lines().count();
    let connections = canvas_connections(&compiled).len();
    let model = compiled.render_model().ok_or("no render")?;
    let enums = model.root.children.iter().filter(|n| stereotype(n).as_deref() == Some("«enumeration»")).count();
    let classes = canvas_elements(&compiled).len() - enums;
    if (classes, enums) != (34, 3) || connections < 40 || lines < 600 {
        return Err(format!("{classes} classes, {enums} enums, {connections} associations, {lines} lines"));
    }
    let renders: Vec<Duration> = (0..5)
        .map(|_| {
            let t = Instant::now();
            let svg = compile(&text).svg();
            assert!(svg.is_some());
            t.elapsed()
        })
        .collect();
    let worst = *renders.iter().max().unwrap();

    let (_s, mut c) = start_server(ServerConfig::default());
    common::open(&mut c, &text);
    c.request("interaction/start", json!({ "uri": URI, "elementId": "canvas0/canvasElement0", "kind": "moveElement" })).map_err(|e| e.0.to_string())?;
    let mut latencies = Vec::new();
    for i in 1..=40 {
        let t = Instant::now();
        c.send_request("interaction/update", json!({ "uri": URI, "params": { "dx": i * 3, "dy": i } }));
        c.wait_for("diagram/incremental", |_| true).ok_or("no incremental")?;
        latencies.push(t.elapsed());
    }
    let med = median(latencies);
    let detail = format!(
        "34 classes, 3 enums, {connections} associations, {lines} lines; slowest full render {:.1} ms, update to incremental median {:.2} ms",
        worst.as_secs_f64() * 1e3,
        med.as_secs_f64() * 1e3
    );
    if worst >= Duration::from_secs(1) || med >= Duration::from_millis(50) {
        return Err(detail);
    }
    Ok(detail)
}

fn stereotype(n: &RenderNode) -> Option<String> {
    if n.classes.iter().any(|c| c == "stereotype") {
        return n.text.as_ref().map(|t| t.lines.join(" "));
    }
    n.children.iter().find_map(stereotype)
}

fn robustness() -> Outcome {
    let answered = std::cell::Cell::new(0);
    let mut runner = TestRunner::new(Config { cases: 150, failure_persistence: None, ..Config::default() });
    runner
        .run(&prop::collection::vec(message(), 1..25), |batch| {
            let (_s, mut c) = start_server(ServerConfig::default());
            c.request("document/open", json!({ "uri": URI, "text": common::TWO_CLASSES })).unwrap();
            answered.set(answered.get() + exchange(&mut c, &batch).map_err(TestCaseError::fail)?);
            c.request("initialize", json!({})).map_err(|e| TestCaseError::fail(format!("server stopped answering: {}", e.0)))?;
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    // reveal while a heavy execution holds a worker
    let text = scale_program();
    let (_s, mut c) = start_server(ServerConfig { execution_delay: Duration::from_millis(800), ..Default::default() });
    c.request("document/open", json!({ "uri": URI, "text": text })).unwrap();
    c.wait_for("diagram/update", |_| true).ok_or("no first render")?;
    c.request("document/change", json!({ "uri": URI, "version": 2, "text": text.replace("apos(", "apos(1 + ") }))
        .map_err(|e| e.0.to_string())?;
    let mut slowest = Duration::ZERO;
    for i in 0..10 {
        let t = Instant::now();
        c.request("source/reveal", json!({ "uri": URI, "elementId": format!("canvas0/canvasElement{i}") })).map_err(|e| e.0.to_string())?;
        slowest = slowest.max(t.elapsed());
    }
    if stats(&mut c)["inFlight"] != 1 {
        return Err("the heavy execution finished before the reveals".into());
    }
    if slowest >= Duration::from_millis(50) {
        return Err(format!("reveal took {:.1} ms during execution", slowest.as_secs_f64() * 1e3));
    }
    Ok(format!(
        "150 fuzz batches, {} fuzzed requests all answered, server alive; slowest reveal during execution {:.2} ms",
        answered.get(),
        slowest.as_secs_f64() * 1e3
    ))
}

fn collect(n: &RenderNode, f: &mut impl FnMut(&RenderNode)) {
    f(n);
    for c in &n.children {
        collect(c, f);
    }
}

fn uml_coverage() -> Outcome {
    let golden_dir = corpus_dir().join("golden");
    let mut markers = BTreeSet::new();
    let mut dashed = false;
    let mut modes = BTreeSet::new();
    let mut prefixes = BTreeSet::new();
    let (mut stereotypes, mut abstracts, mut enums) = (0, 0, 0);
    for (name, text) in corpus() {
        let model = render(&text);
        let golden = std::fs::read_to_string(golden_dir.join(name.replace(".diagram", ".svg"))).map_err(|e| format!("{name}: {e}"))?;
        if compile(&text).svg().as_deref() != Some(golden.as_str()) {
            return Err(format!("{name}: golden SVG differs"));
        }
        collect(&model.root, &mut |n| {
            if let Some(e) = &n.ends {
                markers.insert(format!("{:?}/{:?}", e.start_marker, e.end_marker));
            }
            if n.attributes.get("strokeDash").and_then(|a| a.as_str()).is_some_and(|d| d != "none") && n.ends.is_some() {
                dashed = true;
            }
            if let Some(r) = &n.route {
                modes.insert(format!("{:?}", r.mode));
            }
            let text = n.text.as_ref().map(|t| t.lines.join(" ")).unwrap_or_default();
            if n.classes.iter().any(|c| c == "row") {
                prefixes.insert(text.chars().next().unwrap_or(' '));
            }
            if n.classes.iter().any(|c| c == "stereotype") {
                if text == "«enumeration»" {
                    enums += 1;
                } else {
                    stereotypes += 1;
                }
            }
            if n.classes.iter().any(|c| c == "abstract") {
                abstracts += 1;
            }
        });
    }
    let mut missing = Vec::new();
    for op in OPERATORS {
        if let Some((s, e, dash)) = operator_markers(op) {
            if !markers.contains(&format!("{s:?}/{e:?}")) || (dash && !dashed) {
                missing.push(format!("operator {op}"));
            }
        }
    }
    for p in ['+', '-', '#', '~'] {
        if !prefixes.contains(&p) {
            missing.push(format!("visibility {p}"));
        }
    }
    for m in ["Line", "AxisAligned", "Bezier"] {
        if !modes.contains(m) {
            missing.push(format!("segment mode {m}"));
        }
    }
    for (what, n) in [("stereotype", stereotypes), ("abstract class", abstracts), ("enum", enums)] {
        if n == 0 {
            missing.push(what.to_owned());
        }
    }
    if !missing.is_empty() {
        return Err(format!("golden corpus lacks {}", missing.join(", ")));
    }
    Ok(format!(
        "{} marker pairs, 4 visibilities, {stereotypes} stereotypes, {abstracts} abstract, {enums} enums, 3 segment modes, all goldens match",
        markers.len()
    ))
}

fn main() -> ExitCode {
    // a caveat names the part of a criterion this process cannot observe
    let criteria: [(&str, fn() -> Outcome, Option<&str>); 8] = [
        ("round-trip closure", round_trip, None),
        ("prediction equals full render", prediction, None),
        ("scheduler law", scheduler_law, None),
        ("determinism", determinism, Some("the second platform is only compared by the CI matrix")),
        ("layout properties", layout_properties, None),
        ("scale", scale, None),
        ("protocol robustness", robustness, None),
        ("UML element coverage", uml_coverage, None),
    ];
    let mut failed = 0;
    for (name, check, caveat) in criteria {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => match caveat {
                Some(c) => println!("PARTIAL {name} ({secs:.1} s): {detail}; {c}"),
                None => println!("PASS {name} ({secs:.1} s): {detail}"),
            },
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1} s): {detail}");
            }
        }
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
