//! Acceptance run over the committed fixture bundles. Prints one PASS/FAIL
//! line per criterion and exits non-zero if any failed. Runs without the
//! libtest harness so the lines always reach the output.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rlf_core::config::RunConfig;
use rlf_core::css::{Selector, StyleIndex};
use rlf_core::detection::{detect_with, Boundary, FailureReport, Observability, RlfType};
use rlf_core::localization::{Axis, Direction};
use rlf_core::metrics::oracle::{oracle_verify, Neutralization, RecordedMutations, Verdict};
use rlf_core::metrics::{evaluate, mrr, top_n, Exclusions, GroundTruth, PageInput, Pair};
use rlf_core::noi::{annotate, classify_noi, NoiConfig, Raster};
use rlf_core::par::Execution;
use rlf_core::pipeline::{run, to_json};
use rlf_core::snapshot::{load_bundle, BBox, CaptureBundle};

type Outcome = Result<String, String>;

const BODY: &str = "/html[1]/body[1]";

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn bundle(name: &str) -> Result<CaptureBundle, String> {
    load_bundle(fixtures().join(name)).map_err(|e| format!("{name}: {e}"))
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// ---- criterion 1 ----

fn metric_arithmetic() -> Outcome {
    let start = Instant::now();
    let ranks = |v: &[usize]| v.iter().map(|&r| Some(r)).collect::<Vec<_>>();
    check(mrr(&ranks(&[1, 1, 1, 2])) == 0.875, || "mrr {1,1,1,2} != 0.875".into())?;
    check(mrr(&ranks(&[2])) == 0.5, || "mrr {2} != 0.5".into())?;
    // 19 hits at rank 1, 13 more by rank 3, 6 more by rank 5, 1 more by rank 7, 3 never
    let mut first: Vec<Option<usize>> = Vec::new();
    first.extend(std::iter::repeat_n(Some(1), 19));
    first.extend(std::iter::repeat_n(Some(3), 13));
    first.extend(std::iter::repeat_n(Some(5), 6));
    first.extend(std::iter::repeat_n(Some(7), 1));
    first.extend(std::iter::repeat_n(None, 3));
    let published = [(1, 45.2), (3, 76.2), (5, 90.5), (7, 92.86)];
    let mut got = Vec::new();
    for (n, pct) in published {
        let v = 100.0 * top_n(&first, n);
        check(close(v, pct, 0.05), || format!("top-{n} = {v:.3}%, expected {pct}%"))?;
        got.push(format!("top-{n} {v:.2}%"));
    }
    let t = start.elapsed();
    check(t < Duration::from_secs(1), || format!("took {t:?}"))?;
    Ok(format!("mrr 0.875 / 0.5; {}; {t:?}", got.join(", ")))
}

// ---- criterion 2 ----

fn box_at(b: &CaptureBundle, xpath: &str, w: u32) -> BBox {
    b.element_box(xpath, w).expect("fixture element")
}

fn protrudes(outer: &BBox, inner: &BBox, eps: f64) -> bool {
    inner.x < outer.x - eps || inner.y < outer.y - eps || inner.right() > outer.right() + eps || inner.bottom() > outer.bottom() + eps
}

/// Widths where `holds` is true, as one closed range.
fn single_run(b: &CaptureBundle, mut holds: impl FnMut(u32) -> bool) -> Result<Option<(u32, u32)>, String> {
    let hits: Vec<u32> = b.widths().filter(|&w| holds(w)).collect();
    let Some((&lo, &hi)) = hits.first().zip(hits.last()) else {
        return Ok(None);
    };
    check(hits.len() as u32 == (hi - lo) / b.step + 1, || format!("oracle range {lo}..{hi} has gaps"))?;
    Ok(Some((lo, hi)))
}

/// Small-range oracle on a one-bit layout signature: interior runs whose
/// neighbours on both sides agree, no longer than `max_span` px.
fn small_runs(b: &CaptureBundle, sig: impl Fn(u32) -> bool, max_span: u32) -> Vec<(u32, u32)> {
    let widths: Vec<u32> = b.widths().collect();
    let s: Vec<bool> = widths.iter().map(|&w| sig(w)).collect();
    let mut runs = Vec::new();
    let mut start = 0;
    for k in 1..=s.len() {
        if k == s.len() || s[k] != s[start] {
            runs.push((start, k - 1));
            start = k;
        }
    }
    runs.windows(3)
        .filter(|r| s[r[0].0] == s[r[2].0] && widths[r[1].1] - widths[r[1].0] < max_span)
        .map(|r| (widths[r[1].0], widths[r[1].1]))
        .collect()
}

struct Expect {
    name: &'static str,
    rlf_type: RlfType,
    affected: &'static [&'static str],
    /// Hand-derived from the fixture CSS.
    range: (u32, u32),
}

fn detection_correctness() -> Outcome {
    let cfg = RunConfig::default();
    let eps = cfg.eps;
    let expects = [
        Expect {
            name: "ep_button",
            rlf_type: RlfType::EP,
            affected: &["/html[1]/body[1]/div[1]/a[1]", "/html[1]/body[1]/div[1]"],
            range: (320, 360),
        },
        Expect {
            name: "ec_header",
            rlf_type: RlfType::EC,
            affected: &["/html[1]/body[1]/header[1]/div[1]", "/html[1]/body[1]/header[1]/nav[1]"],
            range: (320, 458),
        },
        Expect {
            name: "vp_options",
            rlf_type: RlfType::VP,
            affected: &["/html[1]/body[1]/ul[1]/li[4]", BODY],
            range: (320, 388),
        },
        Expect {
            name: "we_row",
            rlf_type: RlfType::WE,
            affected: &[
                "/html[1]/body[1]/div[1]/div[3]",
                "/html[1]/body[1]/div[1]/div[1]",
                "/html[1]/body[1]/div[1]/div[2]",
            ],
            range: (320, 459),
        },
        Expect {
            name: "sr_nav",
            rlf_type: RlfType::SR,
            affected: &[],
            range: (770, 800),
        },
    ];
    let mut detect_time = Duration::ZERO;
    let mut notes = Vec::new();
    for e in &expects {
        let b = bundle(e.name)?;
        let t = Instant::now();
        let found = detect_with(&b, &cfg.detect(), Execution::Parallel);
        detect_time += t.elapsed();
        check(found.len() == 1, || format!("{}: {} reports, expected 1: {found:?}", e.name, found.len()))?;
        let r = &found[0];
        check(r.rlf_type == e.rlf_type, || format!("{}: type {:?}", e.name, r.rlf_type))?;
        check(r.affected == e.affected, || format!("{}: affected {:?}", e.name, r.affected))?;
        let a = |k: usize| e.affected[k];
        let oracle = match e.rlf_type {
            RlfType::EP => single_run(&b, |w| protrudes(&box_at(&b, a(1), w), &box_at(&b, a(0), w), eps))?,
            RlfType::VP => single_run(&b, |w| {
                let (body, el) = (box_at(&b, BODY, w), box_at(&b, a(0), w));
                el.x < body.x - eps || el.right() > body.right() + eps
            })?,
            RlfType::EC => single_run(&b, |w| {
                let (p, q) = (box_at(&b, a(0), w), box_at(&b, a(1), w));
                let dx = p.right().min(q.right()) - p.x.max(q.x);
                let dy = p.bottom().min(q.bottom()) - p.y.max(q.y);
                dx > eps && dy > eps
            })?,
            RlfType::WE => single_run(&b, |w| box_at(&b, a(0), w).y >= box_at(&b, a(1), w).bottom() - eps)?,
            RlfType::SR => {
                let link = |k: u32, w: u32| box_at(&b, &format!("{BODY}/nav[1]/a[{k}]"), w);
                let runs = small_runs(&b, |w| close(link(1, w).y, link(2, w).y, eps), cfg.sr_max_span);
                check(runs.len() == 1, || format!("sr oracle found {runs:?}"))?;
                Some(runs[0])
            }
        };
        let got = (r.fail_min, r.fail_max);
        check(oracle == Some(got), || format!("{}: detected {got:?}, per-width oracle {oracle:?}", e.name))?;
        check(got == e.range, || format!("{}: detected {got:?}, hand-derived {:?}", e.name, e.range))?;
        notes.push(format!("{} {}..{}", e.name, got.0, got.1));
    }

    let b = bundle("clean")?;
    let t = Instant::now();
    let found = detect_with(&b, &cfg.detect(), Execution::Parallel);
    detect_time += t.elapsed();
    check(found.is_empty(), || format!("clean: {found:?}"))?;

    let b = bundle("carousel")?;
    let t = Instant::now();
    let found = detect_with(&b, &cfg.detect(), Execution::Parallel);
    detect_time += t.elapsed();
    let animated = "/html[1]/body[1]/div[1]/div[1]";
    check(b.element_state(animated, 320).unwrap().unwrap().computed.has_transition, || {
        "carousel track lost its transition flag".into()
    })?;
    let naming = found.iter().filter(|r| r.affected.iter().any(|x| x.starts_with(animated))).count();
    check(naming == 0, || format!("carousel: {naming} reports name the animated subtree"))?;

    check(detect_time < Duration::from_secs(30), || format!("detection took {detect_time:?}"))?;
    Ok(format!(
        "{}; clean 0; carousel {} reports, 0 animated; 7 x 1081 widths in {detect_time:.2?}",
        notes.join(", "),
        found.len()
    ))
}

// ---- criterion 3 ----

fn case_study() -> Outcome {
    let cfg = RunConfig::default();
    let b = bundle("case_study")?;
    let (failures, ranked) = run(&b, &cfg, Execution::Parallel);
    check(failures.failures.len() == 1, || format!("{} failures", failures.failures.len()))?;
    let f = &failures.failures[0];
    check(f.rlf_type == RlfType::EP && f.boundary == Boundary::Bottom, || format!("{f:?}"))?;
    let rk = &ranked.rankings[0];
    check(
        rk.direction
            == Direction {
                axis: Axis::Vertical,
                boundary: Boundary::Bottom,
            },
        || format!("direction {:?}", rk.direction),
    )?;
    let title = "/html[1]/body[1]/div[1]/div[2]";
    let button = "/html[1]/body[1]/div[1]/div[3]";
    let has = |x: &str, p: &str| rk.entries.iter().any(|e| e.xpath == x && e.property == p);
    check(has(title, "height") && has(button, "margin-top"), || "candidate pairs missing".into())?;
    let top: Vec<&str> = rk.entries.iter().take(3).map(|e| e.property.as_str()).collect();
    check(
        top[0] == "height" && top[1] == "margin-top" && top[2].starts_with("padding"),
        || format!("top 3 {top:?}"),
    )?;
    let rec = RecordedMutations::open(fixtures().join("case_study/mutations")).map_err(|e| e.to_string())?;
    let verdict = |x: &str, p: &str| {
        oracle_verify(&rec, &failures.failures, f, &Pair::new(x, p), Neutralization::Delete, &cfg.detect())
    };
    check(matches!(verdict(title, "height"), Ok(Verdict::Fixes)), || "(title, height) does not fix".into())?;
    let footer = "/html[1]/body[1]/div[2]";
    check(matches!(verdict(footer, "color"), Ok(Verdict::NoEffect)), || "(footer, color) is not neutral".into())?;
    Ok(format!(
        "EP bottom {}..{}; ranked {} > {} > {}; oracle: title height fixes, footer color no effect",
        f.fail_min, f.fail_max, top[0], top[1], top[2]
    ))
}

// ---- criterion 4 ----

const INJECTED: [&str; 5] = ["inj_margin", "inj_width", "inj_negmargin", "inj_wrap", "inj_badge"];

fn localization_quality() -> Outcome {
    let cfg = RunConfig::default();
    let mut firsts = Vec::new();
    let mut pages = Vec::new();
    for name in INJECTED {
        let dir = fixtures().join(name);
        let b = bundle(name)?;
        let (failures, ranked) = run(&b, &cfg, Execution::Parallel);
        let rec = RecordedMutations::open(dir.join("mutations")).map_err(|e| format!("{name}: {e}"))?;
        let text = std::fs::read_to_string(dir.join("truth.json")).map_err(|e| e.to_string())?;
        let truth: GroundTruth = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        for rk in &ranked.rankings {
            let f = failures.failures.iter().find(|f| f.id == rk.failure_id).expect("ranked failure");
            let mut first = None;
            for e in &rk.entries {
                let pair = Pair::new(e.xpath.clone(), e.property.clone());
                let v = oracle_verify(&rec, &failures.failures, f, &pair, Neutralization::Delete, &cfg.detect())
                    .map_err(|err| format!("{name}: {err}"))?;
                let annotated = truth.failures[&f.id].acceptable.contains(&pair);
                check(annotated == (v == Verdict::Fixes), || format!("{name}: truth file disagrees on {pair:?}"))?;
                if v == Verdict::Fixes && first.is_none() {
                    first = Some(e.rank);
                }
            }
            firsts.push((name, first));
        }
        pages.push(PageInput {
            page: name.into(),
            rankings: ranked.ranked_lists(),
            truth,
        });
    }
    let report = evaluate(&pages, Exclusions::default(), cfg.k).map_err(|e| e.to_string())?;
    let at = |n: usize| firsts.iter().filter(|(_, r)| r.is_some_and(|r| r <= n)).count();
    let summary = format!(
        "first fixing ranks {:?}; top-1 {}/5, top-3 {}/5, MRR {:.3}, P@3 {:.3}",
        firsts.iter().map(|(n, r)| format!("{n}={}", r.map_or("-".into(), |r| r.to_string()))).collect::<Vec<_>>(),
        at(1),
        at(3),
        report.total.mrr,
        report.total.p_at_k
    );
    check(firsts.len() == 5, || format!("expected 5 failures: {summary}"))?;
    check(at(1) >= 2 && at(3) >= 4, || summary.clone())?;
    Ok(summary)
}

// ---- criterion 5 ----

fn cascade_resolution() -> Outcome {
    let b = bundle("cascade_px")?;
    let style = StyleIndex::new(&b);
    let mut probes = Vec::new();
    for record in 0..b.record_count() {
        for node in 0..b.tree().len() {
            if style.resolve_at(&b, node, "font-size", record).is_some() {
                probes.push((node, record));
            }
        }
    }
    check(probes.len() >= 50, || format!("only {} probe sites", probes.len()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = Vec::new();
    for k in sample(&mut rng, probes.len(), 50) {
        let (node, record) = probes[k];
        let xpath = &b.tree().node(node).xpath;
        let width = b.width_at(record);
        let authored = style
            .resolve_authored(&b, xpath, "font-size", width)
            .map_err(|e| e.to_string())?
            .and_then(|a| a.normalized_px);
        let computed = b.state(record, node).map(|s| s.computed.font_size);
        if authored.is_none() || authored != computed {
            mismatches.push(format!("{xpath}@{width}: {authored:?} vs {computed:?}"));
        }
    }
    check(mismatches.is_empty(), || format!("{} of 50 probes differ: {mismatches:?}", mismatches.len()))?;

    // specificity against the lexicographic (ids, classes, tags) oracle
    let compound = (
        proptest::option::of(prop::sample::select(vec!["div", "p", "a", "li"])),
        0usize..3,
        0usize..4,
        0usize..2,
    );
    let selector = (prop::collection::vec(compound, 1..4), prop::collection::vec(any::<bool>(), 3)).prop_map(
        |(parts, child)| {
            let mut text = String::new();
            let mut key = (0u32, 0u32, 0u32);
            for (i, (tag, ids, classes, attrs)) in parts.iter().enumerate() {
                if i > 0 {
                    text.push_str(if child[i - 1] { " > " } else { " " });
                }
                let mut c = tag.map(str::to_string).unwrap_or_default();
                (0..*ids).for_each(|k| c.push_str(&format!("#i{k}")));
                (0..*classes).for_each(|k| c.push_str(&format!(".c{k}")));
                (0..*attrs).for_each(|k| c.push_str(&format!("[data-a{k}]")));
                if c.is_empty() {
                    c.push('*');
                }
                text.push_str(&c);
                key.0 += *ids as u32;
                key.1 += (*classes + *attrs) as u32;
                key.2 += u32::from(tag.is_some());
            }
            (text, key)
        },
    );
    let config = Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner
        .run(&(selector.clone(), selector), |((ta, ka), (tb, kb))| {
            let sa = Selector::parse(&ta).expect("generated selector parses").specificity();
            let sb = Selector::parse(&tb).expect("generated selector parses").specificity();
            prop_assert_eq!(sa.cmp(&sb), ka.cmp(&kb), "{} vs {}", ta, tb);
            Ok(())
        })
        .map_err(|e| format!("specificity: {e}"))?;
    Ok(format!("50/50 font-size probes match over {} sites; 1000 selector pairs ordered", probes.len()))
}

// ---- criterion 6 ----

fn noi_classification() -> Outcome {
    let cfg = RunConfig::default();
    let mut seen = Vec::new();
    for (name, want) in [("noi_transparent", Observability::Noi), ("noi_opaque", Observability::Observable)] {
        let b = bundle(name)?;
        let found = detect_with(&b, &cfg.detect(), Execution::Parallel);
        check(found.len() == 1, || format!("{name}: {} reports", found.len()))?;
        let annotated: Vec<FailureReport> =
            annotate(&b, &found, &cfg.noi, Execution::Parallel).map_err(|e| format!("{name}: {e}"))?;
        let r = &annotated[0];
        check(r.observability == want, || format!("{name}: {:?}", r.observability))?;
        seen.push(format!("{name} {:?} ({} px)", r.observability, r.differing_pixels.unwrap_or(0)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let (w, h) = (rng.random_range(1..40), rng.random_range(1..40));
        let mut r = Raster::new(w, h, [0, 0, 0, 255]);
        for p in r.pixels.iter_mut() {
            *p = rng.random();
        }
        let v = classify_noi(&r, &r, &r.full_region(), &NoiConfig::default()).map_err(|e| e.to_string())?;
        check(v.observability == Observability::Noi, || "raster differs from itself".into())?;
    }
    Ok(format!("{}; 100/100 self-comparisons noi", seen.join(", ")))
}

// ---- criterion 7 ----

fn determinism() -> Outcome {
    let cfg = RunConfig::default();
    let mut names: Vec<String> = std::fs::read_dir(fixtures())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().join("manifest.json").exists())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for name in &names {
        let b = bundle(name)?;
        let docs = |exec| {
            let (f, r) = run(&b, &cfg, exec);
            (to_json(&f), to_json(&r))
        };
        let first = docs(Execution::Parallel);
        check(first == docs(Execution::Parallel), || format!("{name}: reruns differ"))?;
        check(first == docs(Execution::Sequential), || format!("{name}: sequential run differs"))?;
    }
    Ok(format!("{} fixtures byte-identical across 3 runs", names.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("metric arithmetic", metric_arithmetic),
        ("detection correctness", detection_correctness),
        ("case-study reproduction", case_study),
        ("localization quality", localization_quality),
        ("cascade resolution", cascade_resolution),
        ("NOI classification", noi_classification),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", i + 1),
            Err(why) => {
                println!("FAIL criterion {} ({name}): {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
