//! `toric-symmetry`: analyze hierarchical models and their groups of invariance.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use toric_symmetry::analysis::analyze;
use toric_symmetry::exactla::{apply_permutation, parse_table, project_increment, CellTable, RationalValue, TableFile};
use toric_symmetry::generic::generic_element;
use toric_symmetry::perm::parse_permutation;
use toric_symmetry::verify::{
    brute_force_stabilizer, check_faithfulness, check_member_invariance, check_nonmember_rejection, markov_fixture,
    sudoku_fixture, theorem_conditions, FixtureReport, KernelContext, Outcome, SuiteReport, DEFAULT_MAX_CELLS,
};
use toric_symmetry::wreath::WreathGroup;
use toric_symmetry::{parse_model, Error, FactorSet, HierarchicalModel};

#[derive(Parser)]
#[command(name = "toric-symmetry", version, about = "Groups of invariance of hierarchical log-linear models")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pseudofactor poset, wreath product structure, dimensions and level conditions.
    Analyze { model: PathBuf },
    /// Draw uniform elements of the wreath product.
    Sample {
        model: PathBuf,
        #[arg(short, long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also confirm each sample stabilizes the kernel of the configuration matrix.
        #[arg(long)]
        check: bool,
    },
    /// Member invariance, non-member rejection and faithfulness suites.
    Verify {
        model: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Brute-force stabilizer of the kernel compared with the wreath product.
    Oracle {
        model: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_CELLS)]
        max_cells: usize,
    },
    /// Generic element of the row space, as a table file.
    Generic {
        model: PathBuf,
        #[arg(short, long, default_value_t = 1)]
        j: u64,
    },
    /// Projection of a table onto the increment space of a factor subset.
    Project {
        model: PathBuf,
        /// Factor subset, 1-based and comma separated (e.g. `1,3`); empty for the constant term.
        #[arg(long, short = 'e', allow_hyphen_values = true)]
        factors: String,
        table: PathBuf,
    },
    /// Apply a cell permutation to a table.
    Act { model: PathBuf, perm: PathBuf, table: PathBuf },
    /// Run a built-in fixture.
    Demo { name: DemoName },
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoName {
    Markov,
    Sudoku,
}

/// Rendered output and whether every assertion held.
struct Report {
    text: String,
    ok: bool,
}

fn done(text: String) -> Report {
    Report { text, ok: true }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<HierarchicalModel, Error> {
    parse_model(&read(path)?)
}

fn to_json(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn parse_factor_set(s: &str, model: &HierarchicalModel) -> Result<FactorSet, Error> {
    let m = model.num_factors();
    let trimmed = s.trim().trim_start_matches('{').trim_end_matches('}');
    let mut set = FactorSet::EMPTY;
    for part in trimmed.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let j: usize = part.parse().map_err(|_| Error::Parse(format!("invalid factor {part:?}")))?;
        if j == 0 || j > m {
            return Err(Error::Validation(format!("factor {j} is outside 1..={m}")));
        }
        set = set.union(FactorSet::singleton(j - 1));
    }
    Ok(set)
}

fn table_json(model: &HierarchicalModel, table: &CellTable) -> String {
    to_json(&table.to_file(model.name()))
}

fn suite_line(r: &SuiteReport) -> String {
    let tag = match r.outcome {
        Outcome::Pass => "PASS",
        Outcome::Fail => "FAIL",
        Outcome::Skipped => "SKIP",
    };
    let mut line = format!("{tag} {}: {} ({} examined of {} trials)", r.suite, r.detail, r.examined, r.trials);
    if let Some(c) = &r.counterexample {
        line.push_str(&format!("; counterexample {c:?}"));
    }
    line + "\n"
}

fn fixture_text(r: &FixtureReport) -> String {
    let mut s = String::new();
    for c in &r.checks {
        s.push_str(&format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
    }
    s.push_str(&format!("{}: {}\n", r.suite, if r.passed { "all checks passed" } else { "FAILED" }));
    s
}

fn cmd_sample(model: &HierarchicalModel, n: usize, seed: u64, check: bool, json_out: bool) -> Result<Report, Error> {
    if n == 0 {
        return Err(Error::Validation("n must be at least 1".into()));
    }
    let group = WreathGroup::new(model);
    let kernel = if check { Some(KernelContext::new(model)?) } else { None };
    let mut ok = true;
    let mut records = Vec::with_capacity(n);
    let mut text = String::new();
    for k in 0..n {
        let w = group.sample_indexed(seed, k as u64);
        let g = group.to_cell_permutation(&w)?;
        let member = group.contains(&g)?;
        let stabilizes = match &kernel {
            Some(ctx) => Some(ctx.stabilizes(&g)?),
            None => None,
        };
        ok &= member && stabilizes.unwrap_or(true);
        if json_out {
            let mut rec = json!({
                "index": k,
                "element": group.to_file(&w)?,
                "permutation": g.to_file(),
                "member": member,
            });
            if let Some(s) = stabilizes {
                rec["stabilizes_kernel"] = json!(s);
            }
            records.push(rec);
        } else {
            text.push_str(&format!("sample {k}: {g}"));
            if let Some(s) = stabilizes {
                text.push_str(if s && member { "  check PASS" } else { "  check FAIL" });
            }
            text.push('\n');
        }
    }
    if json_out {
        text = to_json(&json!({ "seed": seed, "samples": records }));
    }
    Ok(Report { text, ok })
}

fn cmd_verify(model: &HierarchicalModel, trials: usize, seed: u64, json_out: bool) -> Result<Report, Error> {
    if trials == 0 {
        return Err(Error::Validation("trials must be at least 1".into()));
    }
    let mut reports = vec![check_member_invariance(model, trials, seed)?, check_nonmember_rejection(model, trials, seed)?];
    if theorem_conditions(model).conditions_met {
        reports.push(check_faithfulness(model, trials, seed)?);
    } else {
        reports.push(SuiteReport {
            suite: "faithfulness".into(),
            outcome: Outcome::Skipped,
            passed: true,
            trials,
            examined: 0,
            counterexample: None,
            detail: "level conditions not met".into(),
        });
    }
    let ok = reports.iter().all(|r| r.passed);
    let text = if json_out { to_json(&reports) } else { reports.iter().map(suite_line).collect() };
    Ok(Report { text, ok })
}

fn cmd_oracle(model: &HierarchicalModel, max_cells: usize, json_out: bool) -> Result<Report, Error> {
    let r = brute_force_stabilizer(model, max_cells)?;
    // Strict inclusion is a legitimate result; only a broken inclusion is a failure.
    let ok = r.wreath_not_stabilizing == 0 && r.order_divides();
    if json_out {
        return Ok(Report { text: to_json(&r), ok });
    }
    let mut s = String::new();
    if let Some(w) = &r.warning {
        eprintln!("warning: {w}");
    }
    s.push_str(&format!("cells: {}  permutations examined: {}\n", r.p, r.examined));
    s.push_str(&format!(
        "stabilizer {} {} wreath {}: {}\n",
        r.stabilizer_size,
        if r.equal { "=" } else { ">" },
        r.wreath_order,
        if r.equal { "EQUAL" } else { "STRICT" }
    ));
    if let Some(w) = &r.witness {
        s.push_str(&format!("witness outside the wreath product: {w:?}\n"));
    }
    if r.wreath_not_stabilizing > 0 {
        s.push_str(&format!("FAIL: {} wreath elements do not stabilize the kernel\n", r.wreath_not_stabilizing));
    }
    Ok(Report { text: s, ok })
}

fn cmd_generic(model: &HierarchicalModel, j: u64) -> Result<Report, Error> {
    let g = generic_element(model, j)?;
    let file = TableFile {
        model: model.name().map(str::to_owned),
        values: g.table.values().iter().map(|v| RationalValue::Text(v.to_string())).collect(),
    };
    Ok(done(to_json(&file)))
}

fn run(cli: Cli) -> Result<Report, Error> {
    let json_out = cli.json;
    match cli.command {
        Command::Analyze { model } => {
            let report = analyze(&load_model(&model)?)?;
            let ok = report.dim_row_space == report.dim_row_space_formula
                && report.v_map.as_ref().map_or(true, |v| v.injective && v.order_preserving);
            let text = if json_out { to_json(&report) } else { report.to_text() };
            Ok(Report { text, ok })
        }
        Command::Sample { model, n, seed, check } => cmd_sample(&load_model(&model)?, n, seed, check, json_out),
        Command::Verify { model, trials, seed } => cmd_verify(&load_model(&model)?, trials, seed, json_out),
        Command::Oracle { model, max_cells } => cmd_oracle(&load_model(&model)?, max_cells, json_out),
        Command::Generic { model, j } => cmd_generic(&load_model(&model)?, j),
        Command::Project { model, factors, table } => {
            let model = load_model(&model)?;
            let e = parse_factor_set(&factors, &model)?;
            let x = parse_table(&model, &read(&table)?)?;
            Ok(done(table_json(&model, &project_increment(&model, &x, e)?)))
        }
        Command::Act { model, perm, table } => {
            let model = load_model(&model)?;
            let g = parse_permutation(&read(&perm)?)?;
            if g.len() != model.num_cells() {
                return Err(Error::DimensionMismatch { expected: model.num_cells(), got: g.len() });
            }
            let x = parse_table(&model, &read(&table)?)?;
            Ok(done(table_json(&model, &apply_permutation(&g, &x)?)))
        }
        Command::Demo { name } => {
            let r = match name {
                DemoName::Markov => markov_fixture()?,
                DemoName::Sudoku => sudoku_fixture()?,
            };
            let text = if json_out { to_json(&r) } else { fixture_text(&r) };
            Ok(Report { text, ok: r.passed })
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Defect(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    let json_out = cli.json;
    match run(cli) {
        Ok(result) => {
            let written = match &out {
                Some(path) => fs::write(path, &result.text),
                None => {
                    print!("{}", result.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if result.ok { 0 } else { 1 })
        }
        Err(e) => {
            if json_out {
                eprintln!("{}", json!({ "error": e.to_string() }));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
