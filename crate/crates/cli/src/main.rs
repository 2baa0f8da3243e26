use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cybe_forge::averaging::{
    homogeneous_build, is_averaging, is_conformal_averaging, leibniz_check, random_spec, t_star_image, ConfAveOp,
    Mode, XiSpec,
};
use cybe_forge::conformal::{kernel_and_quotient, leibniz_products_and_check, ConfOperator, CurAlgebra};
use cybe_forge::cybe::{
    cybe_check_operator, cybe_check_tensor, residue_extract, rota_baxter_check, solution_from_conformal_averaging,
    solution_from_symmetric_averaging, LaurentOp, Symmetry, TensorSeries,
};
use cybe_forge::averaging::AveragingOp;
use cybe_forge::exact::{parse_rat, rat, Rat};
use cybe_forge::liealg::{
    build_sl, direct_sum, enumerate_closed_symmetric, root_decomposition, validate, LieAlgebra, LieError, RootDatum,
};
use cybe_forge::linalg::Matrix;
use cybe_forge::report::Check;
use cybe_forge::sweep::{Sweep, SweepConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

const REPORT_SCHEMA: &str = "report.v1";
const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Parser)]
#[command(name = "cybe-forge", version, about = "Exact checks for averaging operators, Cur g and CYBE solutions")]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or validate Lie algebras.
    #[command(subcommand)]
    Lie(LieCmd),
    /// Root subsystems.
    #[command(subcommand)]
    Roots(RootsCmd),
    /// Averaging operators and conformal families.
    #[command(subcommand)]
    Avg(AvgCmd),
    /// Classical Yang-Baxter equation.
    #[command(subcommand)]
    Cybe(CybeCmd),
    /// Acceptance sweep.
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgType {
    Sl,
}

#[derive(Subcommand)]
enum LieCmd {
    /// Write `lie-algebra.v1` and `root-datum.v1` files.
    Build {
        #[arg(long = "type", value_enum, conflicts_with = "sum")]
        kind: Option<AlgType>,
        #[arg(long, requires = "kind")]
        n: Option<usize>,
        /// Two algebra files; sibling `.roots.json` files are used when present.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        sum: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the output path with `.roots.json`.
        #[arg(long)]
        roots_out: Option<PathBuf>,
    },
    /// Check antisymmetry and Jacobi on basis elements.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Subcommand)]
enum RootsCmd {
    /// List closed symmetric subsystems with their components.
    Subsystems {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Args)]
struct AlgOp {
    /// `lie-algebra.v1` file.
    #[arg(long)]
    alg: PathBuf,
    /// `conf-ave-op.v1` file or a bare matrix.
    #[arg(long)]
    op: PathBuf,
}

#[derive(Subcommand)]
enum AvgCmd {
    /// Ordinary averaging identity for a single operator.
    Check {
        #[command(flatten)]
        io: AlgOp,
    },
    /// Conformal averaging identity for a family, plus homogeneity when roots are given.
    ConfCheck {
        #[command(flatten)]
        io: AlgOp,
        #[arg(long)]
        roots: Option<PathBuf>,
    },
    /// Build a homogeneous family from a subsystem index.
    Homogeneous {
        #[arg(long)]
        alg: PathBuf,
        #[arg(long)]
        roots: PathBuf,
        #[arg(long)]
        subsystem: usize,
        /// `component:value` pairs; missing components use 1.
        #[arg(long, value_delimiter = ',')]
        xi: Vec<String>,
        #[arg(long = "hperp-deg", default_value_t = 0)]
        hperp_deg: usize,
        #[arg(long, env = "CYBE_FORGE_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Leibniz products, kernel ideal and quotient.
    Leibniz {
        #[command(flatten)]
        io: AlgOp,
    },
}

#[derive(Subcommand)]
enum CybeCmd {
    /// Operator form (exact and sampled) plus the tensor form.
    Check {
        #[arg(long)]
        alg: PathBuf,
        /// `laurent-op.v1` file.
        #[arg(long)]
        op: PathBuf,
    },
    /// Singular part as a `conf-ave-op.v1` family.
    Residue {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// `P_u = T / u` from a symmetric averaging operator.
    FromAvg {
        #[command(flatten)]
        io: AlgOp,
        /// Accept the weaker symmetry `T([T*x, y] − [Tx, y]) = 0`.
        #[arg(long)]
        relaxed: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// `P_u = u^{-1} T_{u^{-1}}` from a homogeneous family.
    FromConfAvg {
        #[command(flatten)]
        io: AlgOp,
        #[arg(long)]
        roots: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Weight-zero Rota-Baxter identity.
    RbCheck {
        #[command(flatten)]
        io: AlgOp,
    },
}

#[derive(Subcommand)]
enum ReportCmd {
    /// Run acceptance criteria 1 to 10.
    RunAll {
        #[arg(long = "rank-max", default_value_t = 3)]
        rank_max: usize,
        #[arg(long, env = "CYBE_FORGE_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        /// Extra `conf-ave-op.v1` families that must pass as homogeneous.
        #[arg(long)]
        fixture: Vec<PathBuf>,
    },
}

/// Input or usage problem; exit code 2.
#[derive(Debug)]
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Res<T> = Result<T, InputError>;

/// Accumulates one `report.v1`.
struct Run {
    command: String,
    hasher: Sha256,
    files: Vec<String>,
    params: BTreeMap<String, Value>,
    checks: Vec<Check>,
    outputs: Vec<String>,
}

impl Run {
    fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            hasher: Sha256::new(),
            files: Vec::new(),
            params: BTreeMap::new(),
            checks: Vec::new(),
            outputs: Vec::new(),
        }
    }

    fn param(&mut self, k: &str, v: Value) {
        self.params.insert(k.into(), v);
    }

    fn read_json(&mut self, path: &Path) -> Res<Value> {
        let bytes = fs::read(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
        self.hasher.update(path.display().to_string().as_bytes());
        self.hasher.update(&bytes);
        self.files.push(path.display().to_string());
        serde_json::from_slice(&bytes).map_err(|e| InputError(format!("{}: {e}", path.display())))
    }

    fn write_json(&mut self, path: &Path, v: &Value) -> Res<()> {
        fs::write(path, serde_json::to_string_pretty(v)? + "\n").map_err(|e| InputError(format!("{}: {e}", path.display())))?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    fn algebra(&mut self, path: &Path) -> Res<LieAlgebra> {
        let v = self.read_json(path)?;
        Ok(LieAlgebra::from_json(&v)?)
    }

    fn roots(&mut self, path: &Path) -> Res<RootDatum> {
        let v = self.read_json(path)?;
        Ok(RootDatum::from_json(&v)?)
    }

    /// `conf-ave-op.v1`, or a bare matrix read as an ordinary operator.
    fn family(&mut self, path: &Path) -> Res<ConfAveOp> {
        let v = self.read_json(path)?;
        if v.is_array() {
            return Ok(ConfAveOp::ordinary(Matrix::from_json(&v)?));
        }
        Ok(ConfAveOp::from_json(&v)?)
    }

    fn single(&mut self, path: &Path) -> Res<Matrix> {
        let t = self.family(path)?;
        if t.degree() != 0 {
            return Err(InputError(format!("{}: expected a single operator (N = 0), got N = {}", path.display(), t.degree())));
        }
        Ok(t.family()[0].clone())
    }

    fn laurent(&mut self, path: &Path) -> Res<LaurentOp> {
        let v = self.read_json(path)?;
        Ok(LaurentOp::from_json(&v)?)
    }

    fn digest(&self) -> String {
        let mut h = self.hasher.clone();
        h.update(serde_json::to_string(&self.params).unwrap_or_default().as_bytes());
        hex::encode(h.finalize())
    }

    fn finish(mut self, started: Instant, input_error: Option<String>) -> (Value, u8) {
        if let Some(e) = &input_error {
            self.checks.push(Check::fail("input", json!(e)));
        }
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
        let passed = self.checks.iter().all(Check::passed);
        let code = if input_error.is_some() { 2 } else if passed { 0 } else { 1 };
        let report = json!({
            "schema": REPORT_SCHEMA,
            "command": self.command,
            "inputs": {"digest": self.digest(), "files": self.files, "params": self.params},
            "outputs": self.outputs,
            "status": match code { 0 => "pass", 1 => "fail", _ => "error" },
            "checks": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
            "timing": {"milliseconds": started.elapsed().as_millis() as u64},
        });
        (report, code)
    }
}

fn roots_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "algebra".into());
    out.with_file_name(format!("{stem}.roots.json"))
}

fn lie(run: &mut Run, cmd: LieCmd) -> Res<()> {
    match cmd {
        LieCmd::Build { kind, n, sum, out, roots_out } => {
            let roots_out = roots_out.unwrap_or_else(|| roots_path(&out));
            let (g, rd) = match (kind, n, sum.as_slice()) {
                (Some(AlgType::Sl), Some(n), []) => {
                    run.param("type", json!("sl"));
                    run.param("n", json!(n));
                    build_sl(n)?
                }
                (None, None, [a, b]) => {
                    let ga = run.algebra(a)?;
                    let gb = run.algebra(b)?;
                    let (ra, rb) = (roots_path(a), roots_path(b));
                    if !ra.exists() || !rb.exists() {
                        return Err(InputError(format!("root data {} and {} are required for a sum", ra.display(), rb.display())));
                    }
                    let (da, db) = (run.roots(&ra)?, run.roots(&rb)?);
                    let g = direct_sum(&ga, &gb);
                    let mut cartan = Vec::new();
                    for h in da.cartan() {
                        let mut v = h.clone();
                        v.resize(g.dim(), rat(0));
                        cartan.push(v);
                    }
                    for h in db.cartan() {
                        let mut v = vec![rat(0); ga.dim()];
                        v.extend(h.iter().cloned());
                        cartan.push(v);
                    }
                    let rd = root_decomposition(&g, &cartan)?;
                    (g, rd)
                }
                _ => return Err(InputError("give either --type sl --n <k> or --sum <file,file>".into())),
            };
            run.write_json(&out, &g.to_json())?;
            run.write_json(&roots_out, &rd.to_json())?;
            run.checks.push(Check::info("dimension", Some(json!({"dim": g.dim(), "rank": rd.rank(), "roots": rd.root_count()}))));
        }
        LieCmd::Validate { input } => {
            let g = run.algebra(&input)?;
            let r = validate(&g);
            let labels = g.labels();
            run.checks.push(Check::from_witness(
                "antisymmetry",
                r.antisymmetry_failure.map(|(i, j)| json!([labels[i], labels[j]])),
            ));
            run.checks.push(Check::from_witness(
                "jacobi",
                r.jacobi_failure.map(|(i, j, k)| json!([labels[i], labels[j], labels[k]])),
            ));
        }
    }
    Ok(())
}

fn roots(run: &mut Run, cmd: RootsCmd) -> Res<()> {
    let RootsCmd::Subsystems { input } = cmd;
    let rd = run.roots(&input)?;
    match enumerate_closed_symmetric(&rd) {
        Ok(subs) => {
            let listing: Vec<Value> = subs.iter().enumerate().map(|(i, s)| json!({"index": i, "subsystem": s.to_json()})).collect();
            run.checks.push(Check::info("subsystems", Some(json!({"count": subs.len(), "list": listing}))));
        }
        Err(e @ LieError::BudgetExceeded { .. }) => run.checks.push(Check::fail("subsystems", json!(e.to_string()))),
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn parse_xi(items: &[String]) -> Res<BTreeMap<usize, Rat>> {
    items
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let (c, v) = s.split_once(':').ok_or_else(|| InputError(format!("--xi entries are component:value, got {s:?}")))?;
            Ok((c.trim().parse::<usize>()?, parse_rat(v.trim())?))
        })
        .collect()
}

fn avg(run: &mut Run, cmd: AvgCmd) -> Res<()> {
    match cmd {
        AvgCmd::Check { io } => {
            let g = run.algebra(&io.alg)?;
            let t = run.single(&io.op)?;
            run.checks.push(Check::from_witness("averaging", is_averaging(&g, &t, Mode::Lie)?));
        }
        AvgCmd::ConfCheck { io, roots } => {
            let g = run.algebra(&io.alg)?;
            let t = run.family(&io.op)?;
            let r = is_conformal_averaging(&g, &t)?;
            run.checks.push(Check::from_witness("conformal-averaging", r.coefficient_witness.clone()));
            run.checks.push(Check::from_witness("conformal-averaging-bipoly", r.bipoly_witness.clone()));
            if let Some(p) = roots {
                let rd = run.roots(&p)?;
                let image = t_star_image(&t);
                let missing = rd.cartan().iter().position(|h| !image.contains(h));
                run.checks.push(Check::from_witness("homogeneous", missing.map(|k| json!({"cartan_index": k}))));
            }
        }
        AvgCmd::Homogeneous { alg, roots, subsystem, xi, hperp_deg, seed, out } => {
            run.param("subsystem", json!(subsystem));
            run.param("xi", json!(xi));
            run.param("hperp_deg", json!(hperp_deg));
            run.param("seed", json!(seed));
            let g = run.algebra(&alg)?;
            let rd = run.roots(&roots)?;
            let subs = enumerate_closed_symmetric(&rd)?;
            let sub = subs.get(subsystem).ok_or_else(|| InputError(format!("subsystem index {subsystem} out of range (0..{})", subs.len())))?;
            let given = parse_xi(&xi)?;
            if let Some(c) = given.keys().find(|c| **c >= sub.components().len()) {
                return Err(InputError(format!("component {c} does not exist; the subsystem has {}", sub.components().len())));
            }
            let mut spec = random_spec(&rd, sub, &mut ChaCha8Rng::seed_from_u64(seed), hperp_deg);
            spec.xi = XiSpec::PerComponent((0..sub.components().len()).map(|c| (c, given.get(&c).cloned().unwrap_or_else(|| rat(1)))).collect());
            match homogeneous_build(&g, &rd, &spec) {
                Ok(fam) => {
                    run.write_json(&out, &fam.op.to_json())?;
                    run.checks.push(Check::info("family", Some(json!({"N": fam.op.degree(), "spec": spec.to_json()}))));
                    run.checks.push(Check::pass("conformal-averaging"));
                }
                Err(cybe_forge::averaging::AvgError::ConstructionFailed(w)) => run.checks.push(Check::fail("conformal-averaging", w)),
                Err(e) => return Err(e.into()),
            }
        }
        AvgCmd::Leibniz { io } => {
            let g = run.algebra(&io.alg)?;
            let t = run.family(&io.op)?;
            if t.degree() == 0 {
                run.checks.extend(leibniz_check(&g, &t.family()[0])?);
            }
            let cur = CurAlgebra::unchecked(g);
            let op = ConfOperator::from(&t);
            let nmax = t.degree() as u32 + 2;
            match leibniz_products_and_check(&cur, &op, nmax) {
                Ok(r) => run.checks.extend(r.checks().into_iter().map(|c| prefixed("conformal", c))),
                Err(e) => run.checks.push(Check::fail("conformal-leibniz-jacobi", json!(e.to_string()))),
            }
            match kernel_and_quotient(&cur, &op) {
                Ok(kq) => {
                    run.checks.push(Check::pass("conformal-kernel-ideal"));
                    run.checks.push(Check::from_witness("conformal-quotient-lie", (!kq.validation.passes()).then(|| kq.validation.to_json())));
                    run.checks.push(prefixed("conformal", kq.higher_products_vanish.clone()));
                    run.checks.extend(kq.split_null.checks.iter().cloned().map(|c| prefixed("conformal", c)));
                }
                Err(e) => run.checks.push(Check::fail("conformal-kernel-ideal", json!(e.to_string()))),
            }
        }
    }
    Ok(())
}

fn prefixed(p: &str, mut c: Check) -> Check {
    c.name = format!("{p}-{}", c.name);
    c
}

fn cybe(run: &mut Run, cmd: CybeCmd) -> Res<()> {
    match cmd {
        CybeCmd::Check { alg, op } => {
            let g = run.algebra(&alg)?;
            let p = run.laurent(&op)?;
            let r = cybe_check_operator(&g, &p)?;
            run.checks.extend(r.checks());
            let tensor = cybe_check_tensor(&g, &TensorSeries::from_op(&g, &p)?)?;
            let agree = tensor.is_none() == r.passed();
            run.checks.push(Check::from_witness("cybe-tensor", tensor));
            run.checks.push(Check::from_witness("cybe-forms-agree", (!agree).then(|| json!("tensor and operator forms disagree"))));
        }
        CybeCmd::Residue { input, out } => {
            let p = run.laurent(&input)?;
            let t = residue_extract(&p)?;
            run.write_json(&out, &t.to_json())?;
            run.checks.push(Check::info("residue", Some(json!({"N": t.degree()}))));
        }
        CybeCmd::FromAvg { io, relaxed, out } => {
            run.param("relaxed", json!(relaxed));
            let g = run.algebra(&io.alg)?;
            let t = run.single(&io.op)?;
            let mode = if relaxed { Symmetry::Relaxed } else { Symmetry::Strict };
            match AveragingOp::verify(&g, t) {
                Ok(op) => match solution_from_symmetric_averaging(&g, &op, mode) {
                    Ok(p) => {
                        run.write_json(&out, &p.to_json())?;
                        run.checks.push(Check::pass("symmetric-averaging"));
                    }
                    Err(cybe_forge::cybe::CybeError::NotSymmetric(w)) => run.checks.push(Check::fail("symmetric-averaging", w)),
                    Err(e) => return Err(e.into()),
                },
                Err(cybe_forge::averaging::AvgError::NotAveraging(w)) => run.checks.push(Check::fail("symmetric-averaging", w)),
                Err(e) => return Err(e.into()),
            }
        }
        CybeCmd::FromConfAvg { io, roots, out } => {
            let g = run.algebra(&io.alg)?;
            let rd = run.roots(&roots)?;
            let t = run.family(&io.op)?;
            match solution_from_conformal_averaging(&g, &rd, &t) {
                Ok(p) => {
                    run.write_json(&out, &p.to_json())?;
                    run.checks.push(Check::pass("homogeneous-conformal-averaging"));
                }
                Err(cybe_forge::cybe::CybeError::Precondition(w)) => run.checks.push(Check::fail("homogeneous-conformal-averaging", w)),
                Err(e) => return Err(e.into()),
            }
        }
        CybeCmd::RbCheck { io } => {
            let g = run.algebra(&io.alg)?;
            let r = run.single(&io.op)?;
            run.checks.extend(rota_baxter_check(&g, &r)?.checks());
        }
    }
    Ok(())
}

fn report(run: &mut Run, cmd: ReportCmd) -> Res<()> {
    let ReportCmd::RunAll { rank_max, seed, trials, fixture } = cmd;
    run.param("rank_max", json!(rank_max));
    run.param("seed", json!(seed));
    run.param("trials", json!(trials));
    if !(1..=3).contains(&rank_max) {
        return Err(InputError(format!("--rank-max must be between 1 and 3, got {rank_max}")));
    }
    let fixtures = fixture.iter().map(|p| run.family(p)).collect::<Res<Vec<_>>>()?;
    let sweep = Sweep::new(SweepConfig { seed, trials, rank_max, fixtures, ..SweepConfig::default() });
    for c in sweep.run_all() {
        eprintln!("{}", c.summary_line());
        let prefix = format!("c{:02}", c.id);
        run.checks.extend(c.checks.into_iter().map(|ch| prefixed(&prefix, ch)));
    }
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Lie(LieCmd::Build { .. }) => "lie build",
        Command::Lie(LieCmd::Validate { .. }) => "lie validate",
        Command::Roots(_) => "roots subsystems",
        Command::Avg(AvgCmd::Check { .. }) => "avg check",
        Command::Avg(AvgCmd::ConfCheck { .. }) => "avg conf-check",
        Command::Avg(AvgCmd::Homogeneous { .. }) => "avg homogeneous",
        Command::Avg(AvgCmd::Leibniz { .. }) => "avg leibniz",
        Command::Cybe(CybeCmd::Check { .. }) => "cybe check",
        Command::Cybe(CybeCmd::Residue { .. }) => "cybe residue",
        Command::Cybe(CybeCmd::FromAvg { .. }) => "cybe from-avg",
        Command::Cybe(CybeCmd::FromConfAvg { .. }) => "cybe from-conf-avg",
        Command::Cybe(CybeCmd::RbCheck { .. }) => "cybe rb-check",
        Command::Report(_) => "report run-all",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let mut run = Run::new(command_name(&cli.command));
    let result = match cli.command {
        Command::Lie(c) => lie(&mut run, c),
        Command::Roots(c) => roots(&mut run, c),
        Command::Avg(c) => avg(&mut run, c),
        Command::Cybe(c) => cybe(&mut run, c),
        Command::Report(c) => report(&mut run, c),
    };
    let input_error = result.err().map(|e| e.0);
    if let Some(e) = &input_error {
        eprintln!("error: {e}");
    }
    let (value, code) = run.finish(started, input_error);
    let text = serde_json::to_string_pretty(&value).expect("report serializes") + "\n";
    match &cli.report {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                eprintln!("error: cannot write report {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(code)
}
