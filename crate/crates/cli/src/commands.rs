use atomdyn::atoms::{self, AtomId, MAX_GEN};
use atomdyn::kit::{self, ThetaRule};
use atomdyn::layout::{self, SvgOptions};
use atomdyn::measure;
use atomdyn::paths::{self, PATH_ENUMERATION_GEN_CAP};
use atomdyn::symbolic::{self, PointCode, RefinementRule};
use atomdyn::{Error, Outcome, Result, VerificationReport};
use serde_json::{json, Value};

use crate::{AtomArg, Command, Format, LRange, MeasureCheck, RuleName, Run, Table};

pub fn execute(cmd: &Command) -> Result<Run> {
    match *cmd {
        Command::VerifyAtoms { gen } => verify_atoms(gen),
        Command::Paths { n, l, from, to, budget } => match (from, to) {
            (Some(a), Some(b)) => paths_between(n, l, a, b, budget),
            _ => paths_total(n, l, budget),
        },
        Command::Measure { check, n, lrange } => match check {
            MeasureCheck::Invariance => invariance(n),
            MeasureCheck::Mixing => {
                let r = lrange.ok_or_else(|| Error::InvalidPath("--lrange is required".into()))?;
                mixing(n, r)
            }
        },
        Command::Entropy { n, lmax } => entropy(n, lmax),
        Command::Theta { n, export, mutant } => theta(n, export, mutant),
        Command::Layout { gen, ref svg, arrows } => layout_cmd(gen, svg.as_deref(), arrows),
        Command::Tower { p, gen } => tower(p, gen),
        Command::Converge { levels, p, ref eps } => converge(levels, p, eps),
        Command::Orbit { depth, steps, rule, ref choices, start } => orbit(depth, steps, rule, choices, start),
    }
}

fn run(params: Value, summary: String, report: VerificationReport, data: Value) -> Run {
    Run {
        params,
        summary,
        report,
        data,
        table: None,
        svg: None,
        default_format: Format::Json,
    }
}

fn verify_atoms(gen: u32) -> Result<Run> {
    let report = atoms::verify_axioms(gen)?;
    let count = atoms::atom_count(gen);
    Ok(run(
        json!({ "gen": gen }),
        format!("{count} atoms verified at generation {gen}"),
        report,
        json!({ "gen": gen, "atoms": count.to_string(), "degree": atoms::degree(gen) }),
    ))
}

fn paths_total(n: u32, l: u32, budget: u64) -> Result<Run> {
    let params = json!({ "n": n, "l": l, "budget": budget });
    let c = paths::count_paths_total_report(n, l, budget)?;
    let enumerated = c.enumerated.as_ref().map_or("skipped".to_string(), |e| e.to_string());
    let mut report = VerificationReport::new();
    report.check("path_count_total", params.clone(), || {
        Outcome::new(&c.formula, format!("dp={} enumerated={enumerated}", c.dp), c.matches)
    });
    let table = Table {
        header: vec!["n", "l", "formula", "dp", "enumerated", "match"],
        rows: vec![vec![
            n.to_string(),
            l.to_string(),
            c.formula.to_string(),
            c.dp.to_string(),
            enumerated,
            c.matches.to_string(),
        ]],
    };
    let mut r = run(
        params,
        format!("{} paths of {} atoms at n={n}, l={l}", c.dp, l + 1),
        report,
        serde_json::to_value(&c).expect("serializable"),
    );
    r.table = Some(table);
    Ok(r)
}

fn paths_between(n: u32, l: u32, from: u64, to: u64, budget: u64) -> Result<Run> {
    let a = AtomId::new(n, from)?;
    let b = AtomId::new(n, to)?;
    let params = json!({ "n": n, "l": l, "from": from, "to": to, "budget": budget });
    let dp = paths::count_paths_between(n, l, a, b)?;
    let formula = paths::paths_between_formula(n, l);
    let enumerated = match paths::enumerate_paths(n, l, a, b, budget) {
        Ok(it) => Some(it.count() as u64),
        Err(Error::BudgetExceeded(_)) => None,
        Err(e) => return Err(e),
    };
    let mut report = VerificationReport::new();
    if let Some(f) = &formula {
        report.check("path_count_between", params.clone(), || Outcome::equal(f, &dp));
    }
    if let Some(e) = enumerated {
        report.check("path_count_enumerated", params.clone(), || {
            Outcome::equal(dp.to_string(), e.to_string())
        });
    }
    let shown = |v: Option<String>| v.unwrap_or_else(|| "-".to_string());
    let table = Table {
        header: vec!["n", "l", "from", "to", "formula", "dp", "enumerated"],
        rows: vec![vec![
            n.to_string(),
            l.to_string(),
            from.to_string(),
            to.to_string(),
            shown(formula.as_ref().map(|f| f.to_string())),
            dp.to_string(),
            shown(enumerated.map(|e| e.to_string())),
        ]],
    };
    let note = if formula.is_none() {
        format!(", no closed form below l = {}", (2 * n).saturating_sub(1))
    } else {
        String::new()
    };
    let data = json!({
        "formula": formula.map(|f| f.to_string()),
        "dp": dp.to_string(),
        "enumerated": enumerated,
    });
    let mut r = run(params, format!("{dp} paths from {a} to {b}{note}"), report, data);
    r.table = Some(table);
    Ok(r)
}

fn invariance(n: u32) -> Result<Run> {
    let params = json!({ "n": n });
    let pre = measure::preimage_masses_enumerated(n)?;
    let rows: Vec<(AtomId, measure::DyadicMass, measure::DyadicMass)> = AtomId::all(n)
        .zip(pre)
        .map(|(a, m)| (a, measure::cylinder_mass(a), m))
        .collect();
    let mut report = VerificationReport::new();
    report.check("invariance", params.clone(), || {
        Outcome::holds(
            "preimage mass equals cylinder mass for every atom",
            rows.iter()
                .find(|(_, c, p)| c != p)
                .map(|(a, c, p)| format!("{a}: cylinder {c}, preimage {p}")),
        )
    });
    report.check("invariance_total", params.clone(), || {
        let total: measure::DyadicMass = rows.iter().map(|r| r.2.clone()).sum();
        Outcome::equal(measure::DyadicMass::one(), total)
    });
    let table = Table {
        header: vec!["gen", "index", "cylinder_mass", "preimage_mass"],
        rows: rows
            .iter()
            .map(|(a, c, p)| vec![a.gen().to_string(), a.index().to_string(), c.to_string(), p.to_string()])
            .collect(),
    };
    let mut r = run(
        params,
        format!("{} atoms of generation {n} checked", rows.len()),
        report,
        json!({ "atoms": rows.len() }),
    );
    r.table = Some(table);
    Ok(r)
}

fn mixing(n: u32, range: LRange) -> Result<Run> {
    let threshold = (2 * n).saturating_sub(1).max(1);
    let mut report = VerificationReport::new();
    let mut rows = Vec::new();
    let mut data = Vec::new();
    for l in range.start..=range.end {
        let m = measure::mixing_check(n, l)?;
        let params = json!({ "n": n, "l": l });
        let claimed = l >= threshold;
        let observed = format!(
            "product law {} ({} zero pairs)",
            if m.product_law_holds { "holds" } else { "fails" },
            m.zero_pairs
        );
        report.check("mixing", params, || {
            if claimed {
                Outcome::holds(
                    "correlation = product of masses for every pair",
                    m.counterexample.as_ref().map(|(c, d, mass)| format!("{c}, {d} have mass {mass}")),
                )
            } else {
                Outcome::new(format!("no product law claimed below l = {threshold}"), &observed, true)
            }
        });
        rows.push(vec![
            n.to_string(),
            l.to_string(),
            m.pairs_checked.to_string(),
            m.zero_pairs.to_string(),
            m.product_law_holds.to_string(),
            claimed.to_string(),
        ]);
        data.push(serde_json::to_value(&m).expect("serializable"));
    }
    let mut r = run(
        json!({ "n": n, "lrange": [range.start, range.end] }),
        format!("product law from l = {threshold}"),
        report,
        Value::Array(data),
    );
    r.table = Some(Table {
        header: vec!["n", "l", "pairs", "zero_pairs", "product_law", "claimed"],
        rows,
    });
    Ok(r)
}

fn entropy(n: u32, lmax: u32) -> Result<Run> {
    let params = json!({ "n": n, "lmax": lmax });
    let rate = measure::entropy_rate(n, lmax);
    let mut report = VerificationReport::new();
    report.check("entropy_increments", params.clone(), || {
        Outcome::holds(
            &format!("H(n, l+1) - H(n, l) = {n}"),
            rate.increments
                .iter()
                .position(|&d| d != n as u64)
                .map(|l| format!("increment {} at l={l}", rate.increments[l])),
        )
    });
    let enumerate = n <= PATH_ENUMERATION_GEN_CAP;
    let mut enumerated = Vec::new();
    for &(l, h) in &rate.table {
        if !enumerate {
            enumerated.push(None);
            continue;
        }
        let p = json!({ "n": n, "l": l });
        let got = measure::partition_entropy_enumerated(n, l);
        report.check("entropy_enumerated", p, || match &got {
            Ok(e) => {
                let cross = e.atom_cross_check.unwrap_or(true);
                let pass = e.entropy_bits == h && e.total_mass == measure::DyadicMass::one() && cross;
                Outcome::new(
                    format!("{h} bits, total mass 1"),
                    format!("{} bits, total mass {}, atom cross-check {:?}", e.entropy_bits, e.total_mass, e.atom_cross_check),
                    pass,
                )
            }
            Err(err) => Outcome::new(format!("{h} bits"), format!("counterexample: {err}"), false),
        });
        enumerated.push(got.ok().map(|e| e.entropy_bits.0));
    }
    let rows = rate
        .table
        .iter()
        .zip(&enumerated)
        .map(|((l, h), e)| {
            vec![
                n.to_string(),
                l.to_string(),
                h.0.to_string(),
                e.map_or_else(|| "-".to_string(), |e| e.to_string()),
            ]
        })
        .collect();
    let mut r = run(
        params,
        format!("H = n^2 + n*l for l = 0..={lmax}{}", if enumerate { "" } else { " (enumeration skipped)" }),
        report,
        serde_json::to_value(&rate).expect("serializable"),
    );
    r.table = Some(Table {
        header: vec!["n", "l", "H_bits", "enumerated_bits"],
        rows,
    });
    r.default_format = Format::Csv;
    Ok(r)
}

fn theta(n: u32, export: bool, mutant: bool) -> Result<Run> {
    let params = json!({ "n": n, "export": export, "mutant": mutant });
    let table = if export { Some(kit::theta_table(n)?) } else { None };
    let rule = if mutant { ThetaRule::TagFromImage } else { ThetaRule::Standard };
    let report = kit::theta_verify_with(n, rule)?;
    let labels = atoms::generation_size(n + 1) * atoms::degree(n + 1);
    let data = json!({ "labels": labels, "table": table });
    let mut r = run(params, format!("θ checked on {labels} labels"), report, data);
    r.table = table.map(|rows| Table {
        header: vec!["n", "atom", "slot", "image_atom", "image_slot"],
        rows: rows
            .iter()
            .map(|t| {
                vec![
                    t.n.to_string(),
                    t.atom_index.to_string(),
                    t.slot.to_string(),
                    t.image_atom_index.to_string(),
                    t.image_slot.to_string(),
                ]
            })
            .collect(),
    });
    r.default_format = Format::Csv;
    Ok(r)
}

fn layout_cmd(gen: u32, svg_path: Option<&std::path::Path>, arrows: Option<u32>) -> Result<Run> {
    let params = json!({ "gen": gen, "arrows": arrows });
    let report = layout::verify_layout(gen)?;
    let rows = layout::diameter_table(gen)?;
    let svg = layout::svg_generations(gen, &SvgOptions { arrows, size: None })?;
    if let Some(path) = svg_path {
        std::fs::write(path, &svg).map_err(|e| Error::InvalidBoxes(format!("{}: {e}", path.display())))?;
    }
    let table = Table {
        header: vec!["gen", "boxes", "side", "max_diam"],
        rows: rows
            .iter()
            .map(|d| vec![d.gen.to_string(), d.boxes.to_string(), d.side.to_string(), d.max_diam.to_string()])
            .collect(),
    };
    let mut r = run(
        params,
        format!("{} nested generations laid out", gen + 1),
        report,
        serde_json::to_value(&rows).expect("serializable"),
    );
    r.table = Some(table);
    r.svg = Some(svg);
    Ok(r)
}

fn tower(p: u32, gen: u32) -> Result<Run> {
    let t = layout::tower_build(p, gen)?;
    let report = layout::verify_tower(&t, gen)?;
    let boxes = layout::tower_measure(&t, gen)?;
    let table = Table {
        header: vec!["station", "gen", "index", "center_x", "center_y", "side", "mass"],
        rows: boxes
            .iter()
            .map(|w| {
                let c = w.rect.center();
                vec![
                    w.station.to_string(),
                    w.atom.gen().to_string(),
                    w.atom.index().to_string(),
                    c.x.to_string(),
                    c.y.to_string(),
                    w.rect.side_f64().to_string(),
                    layout::format_mass(&w.mass),
                ]
            })
            .collect(),
    };
    let mut r = run(
        json!({ "p": p, "gen": gen }),
        format!("{} weighted boxes over {p} stations", boxes.len()),
        report,
        serde_json::to_value(&t).expect("serializable"),
    );
    r.table = Some(table);
    Ok(r)
}

fn converge(levels: u32, p: u32, eps: &[f64]) -> Result<Run> {
    let params = json!({ "levels": levels, "p": p, "eps": eps });
    let seq = layout::good_sequence(levels, p)?;
    let mut report = layout::verify_good_sequence(&seq);
    let conv = layout::convergence_report(&seq, eps)?;
    report.check("converge_masses_exact", params.clone(), || {
        Outcome::new(format!("every ball carries mass 1/{p}"), conv.masses_exact, conv.masses_exact)
    });
    report.check("converge_bound_halves", params.clone(), || {
        Outcome::new("bound halves each level", conv.bound_halves, conv.bound_halves)
    });
    report.check("converge_bound_below_diam", params.clone(), || {
        Outcome::holds(
            "bound at most the ball diameter",
            conv.rows
                .iter()
                .find(|r| r.bl_bound > r.max_diam)
                .map(|r| format!("level {}: {} > {}", r.level, r.bl_bound, r.max_diam)),
        )
    });
    let rows = conv
        .rows
        .iter()
        .map(|r| {
            vec![
                r.level.to_string(),
                r.ball_masses.iter().map(layout::format_mass).collect::<Vec<_>>().join(";"),
                r.max_diam.to_string(),
                r.bl_bound.to_string(),
            ]
        })
        .collect();
    let data = json!({ "convergence": conv, "limit_points": seq.limit_points });
    let mut r = run(params, format!("final bound {:.3e} after {levels} levels", conv.final_bound), report, data);
    r.table = Some(Table {
        header: vec!["level", "ball_masses", "max_diam", "bl_bound"],
        rows,
    });
    Ok(r)
}

fn orbit(depth: usize, steps: usize, rule: RuleName, choices: &[u64], start: Option<AtomArg>) -> Result<Run> {
    let rule = match rule {
        RuleName::Zero => RefinementRule::Zero,
        RuleName::Stream => RefinementRule::stream(choices.to_vec())?,
    };
    let start = match start {
        Some(s) => AtomId::new(s.gen, s.index)?,
        None => AtomId::ROOT,
    };
    if depth > MAX_GEN as usize {
        return Err(Error::GenerationCap { gen: depth as u32, cap: MAX_GEN });
    }
    if (start.gen() as usize) > depth {
        return Err(Error::AncestorAbove { target: depth as u32, gen: start.gen() });
    }
    let params = json!({
        "depth": depth,
        "steps": steps,
        "rule": rule.name(),
        "choices": choices,
        "start": [start.gen(), start.index()],
    });
    let x0 = symbolic::refine(&PointCode::from_atom(start, rule.clone()), depth);
    let xs = (0..=steps).map(|k| symbolic::forward(&x0, k)).collect::<Result<Vec<_>>>()?;

    let mut report = VerificationReport::new();
    report.check("orbit_codes_valid", params.clone(), || {
        Outcome::holds(
            "every iterate is a nested chain",
            xs.iter()
                .enumerate()
                .find_map(|(k, x)| PointCode::new(x.chain().to_vec(), rule.clone()).err().map(|e| format!("step {k}: {e}"))),
        )
    });
    let m = (depth - steps) as u32;
    let path = symbolic::itinerary(x0.deepest(), m, steps as u32)?;
    report.check("orbit_itinerary", params.clone(), || {
        Outcome::holds(
            &format!("iterates visit the itinerary of generation-{m} atoms"),
            xs.iter().enumerate().find_map(|(k, x)| {
                let seen = symbolic::ancestor(x.deepest(), m).ok()?;
                (seen != path.atoms()[k]).then(|| format!("step {k}: {seen} vs {}", path.atoms()[k]))
            }),
        )
    });
    report.check("orbit_backward", params.clone(), || {
        let bad = xs.iter().enumerate().filter(|(k, _)| 2 * k < depth).find_map(|(k, x)| {
            let keep = depth - 2 * k;
            match symbolic::backward(x, k) {
                Ok(y) if y.truncated(keep) == x0.truncated(keep) => None,
                Ok(y) => Some(format!("step {k}: {y} disagrees with the start")),
                Err(e) => Some(format!("step {k}: {e}")),
            }
        });
        Outcome::holds("backward undoes forward on the known levels", bad)
    });

    let rows = xs
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let d = x.deepest();
            vec![
                k.to_string(),
                x.depth().to_string(),
                d.gen().to_string(),
                d.index().to_string(),
                x.to_string(),
            ]
        })
        .collect();
    let data = json!({ "start": x0, "iterates": xs, "itinerary": path });
    let mut r = run(params, format!("{steps} steps from depth {depth}"), report, data);
    r.table = Some(Table {
        header: vec!["step", "depth", "gen", "index", "chain"],
        rows,
    });
    Ok(r)
}
