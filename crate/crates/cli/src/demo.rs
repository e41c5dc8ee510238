//! Worked instances rebuilt from scratch and compared with their known numbers.

use std::collections::BTreeSet;
use std::io::Write;

use serde_json::json;
use shapdag::builders::{coalition_damg, instances, ising_game, members, power_set_damg, CoalitionPartition};
use shapdag::generate::{random_game, rng};
use shapdag::projection::project_subset;
use shapdag::shapley::{
    chain_shapley_comparator, classic_shapley_oracle, shapley_path_uniform, shapley_recursive, shapley_total_weights,
    shapley_weighted, Attribution, DEFAULT_CHAIN_CAP,
};
use shapdag::{
    moebius_function, rat, EdgeWeights, ProjectionKernel, Rational, RootWeights, Scalar, Shape, ValueFunction,
};

use crate::args::{DemoName, Format};
use crate::commands::{emit, pretty};
use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct Row {
    pub check: String,
    pub expected: String,
    pub got: String,
    pub pass: bool,
}

impl Row {
    fn eq(check: impl Into<String>, expected: impl ToString, got: impl ToString) -> Row {
        let (expected, got) = (expected.to_string(), got.to_string());
        Row { check: check.into(), pass: expected == got, expected, got }
    }
}

pub fn run(name: DemoName, format: Format, out: &mut dyn Write) -> Result<bool, CliError> {
    let rows = rows(name)?;
    let pass = rows.iter().all(|r| r.pass);
    let text = match format {
        Format::Tsv => {
            let mut lines = vec!["check\texpected\tgot\tstatus".to_string()];
            for r in &rows {
                lines.push(format!("{}\t{}\t{}\t{}", r.check, r.expected, r.got, status(r.pass)));
            }
            lines.join("\n")
        }
        Format::Json => pretty(&json!({
            "rows": rows
                .iter()
                .map(|r| json!({ "check": r.check, "expected": r.expected, "got": r.got, "status": status(r.pass) }))
                .collect::<Vec<_>>(),
            "status": status(pass),
        })),
    };
    emit(out, &text)?;
    Ok(pass)
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn rows(name: DemoName) -> Result<Vec<Row>, CliError> {
    match name {
        DemoName::WeakMiddle => weak_middle(),
        DemoName::ReverseTree => reverse_tree(),
        DemoName::PosetGame => poset_game(),
        DemoName::Ising => ising(),
        DemoName::Coalition => coalition(),
        DemoName::Classic => classic(),
    }
}

fn joined(xs: impl IntoIterator<Item = impl ToString>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn shapley_row(check: &str, a: &Attribution<Rational>, expected: &[&str]) -> Row {
    Row::eq(check, expected.join(","), joined(a.per_root.iter().map(|(_, v)| v.components()[0].clone())))
}

fn weak_middle() -> Result<Vec<Row>, CliError> {
    let (g, v) = instances::weak_middle();
    let w = v.moebius_transform();
    let q = ProjectionKernel::path_uniform(&g);
    let p = project_subset(&q, &w, &["d", "e"])?;
    let bg: Vec<&str> = p
        .graph
        .edges()
        .iter()
        .filter(|e| p.graph.label(e.tail) == "b" && p.graph.label(e.head) == "g")
        .map(|e| e.id.as_str())
        .collect();
    let value = p.synergy.inverse_moebius();
    Ok(vec![
        Row::eq("synergy w", "1,2,3,0,0,2,8,4", joined(w.values().iter().map(|m| m.components()[0].clone()))),
        shapley_row("Sh (recursive)", &shapley_recursive(&q, &v)?, &["4", "9", "7"]),
        shapley_row("Sh (total-weights)", &shapley_total_weights(&q, &v)?, &["4", "9", "7"]),
        Row::eq("vertices without d,e", "a,b,c,f,g,h", p.graph.labels().join(",")),
        Row::eq("v without d,e", "1,2,3,5,14,9", joined(value.values().iter().map(|m| m.components()[0].clone()))),
        Row::eq("w without d,e", "1,2,3,2,8,4", joined(p.synergy.values().iter().map(|m| m.components()[0].clone()))),
        Row::eq("edges b->g", "bd*dg,be*eg", bg.join(",")),
    ])
}

fn reverse_tree() -> Result<Vec<Row>, CliError> {
    let (g, v) = instances::reverse_tree();
    let custom =
        ProjectionKernel::from_map(&g, [("ad", rat(1, 2)), ("bd", rat(1, 2)), ("de", rat(1, 3)), ("ce", rat(2, 3))])?;
    Ok(vec![
        shapley_row(
            "Sh (path-uniform)",
            &shapley_recursive(&ProjectionKernel::path_uniform(&g), &v)?,
            &["7/3", "7/3", "7/3"],
        ),
        shapley_row("Sh (maximal chains)", &chain_shapley_comparator(&v, DEFAULT_CHAIN_CAP)?, &["5/3", "5/3", "11/3"]),
        shapley_row("Sh (custom kernel)", &shapley_total_weights(&custom, &v)?, &["5/3", "5/3", "11/3"]),
    ])
}

fn poset_game() -> Result<Vec<Row>, CliError> {
    let (g, v) = instances::poset_game();
    let mu = moebius_function(&g);
    let mut rows: Vec<Row> =
        g.edges().iter().map(|e| Row::eq(format!("mu({})", e.id), "-1", mu.get(e.tail, e.head))).collect();
    rows.push(shapley_row("Sh", &shapley_recursive(&ProjectionKernel::path_uniform(&g), &v)?, &["7/2", "5/2"]));
    Ok(rows)
}

fn ising() -> Result<Vec<Row>, CliError> {
    let attribute = |x: i64, beta: Rational| -> Result<Attribution<Rational>, CliError> {
        let (g, v) = ising_game(&instances::ising_four_spins(rat(x, 1), beta))?;
        Ok(shapley_recursive(&ProjectionKernel::path_uniform(&g), &v)?)
    };
    let mut rows = Vec::new();
    for x in 0..=6 {
        let a = attribute(x, Rational::one())?;
        let (sa, sd) = (a.scalar("a").cloned().unwrap_or_default(), a.scalar("d").cloned().unwrap_or_default());
        let gap = sa.clone() - sd.clone();
        let (expected, pass) = match x.cmp(&3) {
            std::cmp::Ordering::Less => ("Sh_a > Sh_d", gap > Rational::zero()),
            std::cmp::Ordering::Equal => ("Sh_a = Sh_d", gap.is_zero()),
            std::cmp::Ordering::Greater => ("Sh_a < Sh_d", gap < Rational::zero()),
        };
        let ratio = sa.checked_div(&sd).map_or_else(|| "inf".to_string(), |r| r.to_string());
        rows.push(Row {
            check: format!("J_bcd = {x}"),
            expected: expected.to_string(),
            got: format!("Sh_a = {sa}, Sh_d = {sd}, Sh_a/Sh_d = {ratio}"),
            pass,
        });
    }
    let zero = attribute(3, Rational::zero())?;
    rows.push(Row::eq("beta = 0", "0,0,0,0", joined(zero.per_root.iter().map(|(_, v)| v.components()[0].clone()))));
    Ok(rows)
}

fn coalition() -> Result<Vec<Row>, CliError> {
    let players: Vec<String> = ["a", "b", "c", "d", "e"].map(String::from).to_vec();
    let blocks = vec![vec!["a".to_string(), "b".to_string()], vec!["c".into()], vec!["d".into()], vec!["e".into()]];
    let g = coalition_damg(&CoalitionPartition { players, blocks })?;
    let sigma = EdgeWeights::constant(&g, Rational::one());
    let unit = RootWeights::constant(&g, Rational::one());
    let sized = RootWeights::from_map(
        &g,
        g.roots().iter().map(|&x| (g.label(x).to_string(), Rational::from(members(g.label(x)).len() as i64))),
    )?;
    let r1: BTreeSet<&str> = ["a", "b"].into();
    let mut rows = Vec::new();
    for y in ["a|b|c|d|e", "a|b|c", "c|d|e", "c|d"] {
        let game = ValueFunction::<Rational>::unanimity(&g, y)?;
        let ym = members(y);
        let size = ym.len() as i64;
        for (tau, name) in [(&unit, "tau=1"), (&sized, "tau=|r|")] {
            let a = shapley_weighted(&sigma, tau, &game)?;
            for (root, got) in &a.per_root {
                let rm = members(root);
                let want = if !rm.is_subset(&ym) {
                    Rational::zero()
                } else if name == "tau=|r|" {
                    rat(rm.len() as i64, size)
                } else if r1.is_subset(&ym) {
                    rat(1, size - r1.len() as i64 + 1)
                } else {
                    rat(1, size)
                };
                rows.push(Row::eq(format!("{name} Sh_{root}(u_{y})"), want, &got.components()[0]));
            }
        }
    }
    Ok(rows)
}

fn classic() -> Result<Vec<Row>, CliError> {
    let mut rng = rng(4);
    let g = power_set_damg(&["p1", "p2", "p3", "p4"])?;
    let mut rows = Vec::new();
    for i in 0..10 {
        let v = random_game(&mut rng, &g, Shape::Scalar);
        let classic = classic_shapley_oracle(4, &v)?;
        let ours = shapley_path_uniform(&v)?;
        let values = |a: &Attribution<Rational>| joined(a.per_root.iter().map(|(_, v)| v.components()[0].clone()));
        rows.push(Row::eq(format!("game {i}"), values(&classic), values(&ours)));
    }
    Ok(rows)
}
