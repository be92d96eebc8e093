//! Command-line front end: staircases, tongues, modulus estimates,
//! decay tables, and convergent ladders, emitted as CSV.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rug::Float;

use modelock::circlemap::CircleLift;
use modelock::contfrac::cf_expand;
use modelock::decay::{corollary_check, decay_report, univalence_oracle_tau};
use modelock::herman::{birkhoff_phi, conjugacy_fourier, modulus_estimate};
use modelock::locking::{default_grid, plateau, tongues_2d};
use modelock::mapspec::{eval_expr, parse_map};
use modelock::precision::{shortest_string, PrecisionPolicy};
use modelock::rotation::staircase;

#[derive(Parser)]
#[command(name = "modelock", version, about = "Mode-locking plateaus, Herman-ring moduli, and decay experiments for analytic circle maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct MapOpts {
    /// Inline map spec, e.g. 'standard a=1/(4*pi)' or 'conjrot theta=golden eps=0.1'
    #[arg(long, global = true)]
    map: Option<String>,
    /// File with a key/value map spec (kind=..., theta=..., ...)
    #[arg(long, global = true, conflicts_with = "map")]
    map_file: Option<PathBuf>,
}

#[derive(Args)]
struct CommonOpts {
    /// Working precision in bits (fixed policy)
    #[arg(long, default_value_t = 128)]
    precision_bits: u32,
    /// Scale precision with the denominator instead of using a fixed budget
    #[arg(long)]
    auto_precision: bool,
    /// Absolute tolerance for enclosures and root finding
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Grid size for extrema scans (default: 16*q, at least 256)
    #[arg(long)]
    grid: Option<usize>,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV
    #[arg(long)]
    plot: bool,
    /// Worker thread cap
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the devil's staircase t -> Trans(F_t)
    Staircase {
        #[command(flatten)]
        map: MapOpts,
        #[command(flatten)]
        common: CommonOpts,
        /// Parameter range
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values = ["0", "1"])]
        range: Vec<String>,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        /// Enclosure denominator (width of each enclosure is below 1/q)
        #[arg(long, default_value_t = 13)]
        q: u64,
    },
    /// Locate one plateau I(p/q) and report its width
    Tongue {
        #[command(flatten)]
        map: MapOpts,
        #[command(flatten)]
        common: CommonOpts,
        /// Target fraction p/q
        #[arg(long)]
        frac: String,
    },
    /// Tongue boundaries over a range of standard-family amplitudes
    Tongues2d {
        #[command(flatten)]
        common: CommonOpts,
        /// t range
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values = ["0", "1"])]
        range: Vec<String>,
        /// Amplitude range (upper bound must stay below 1/(2*pi))
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values = ["0.01", "0.15"])]
        a_range: Vec<String>,
        #[arg(long, default_value_t = 8)]
        a_samples: usize,
        #[arg(long, default_value_t = 5)]
        q_max: u64,
    },
    /// Estimate the Herman half-modulus from Fourier decay
    Modulus {
        #[command(flatten)]
        map: MapOpts,
        #[command(flatten)]
        common: CommonOpts,
        /// Translation number of the map (expression; golden allowed)
        #[arg(long, default_value = "golden")]
        theta: String,
        /// Birkhoff averaging depth
        #[arg(long, default_value_t = 34)]
        depth: u64,
        /// Highest Fourier mode
        #[arg(long, default_value_t = 16)]
        k_max: usize,
        /// Fit window [K_LO, K_HI] in mode index
        #[arg(long, num_args = 2, value_names = ["K_LO", "K_HI"])]
        fit: Option<Vec<usize>>,
    },
    /// Plateau widths along convergents and the Theorem-1 slope table
    Decay {
        #[command(flatten)]
        map: MapOpts,
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value = "golden")]
        theta: String,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        /// Reference tau for the bound (default: univalence oracle for
        /// conjrot maps, else Fourier estimate)
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Continued-fraction convergents of an expression
    Convergents {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        theta: String,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

struct Output {
    path: Option<PathBuf>,
    buf: String,
}

impl Output {
    fn line(&mut self, s: &str) {
        self.buf.push_str(s);
        self.buf.push('\n');
    }

    fn finish(self) -> Result<(), modelock::Error> {
        match self.path {
            Some(p) => std::fs::write(p, self.buf).map_err(Into::into),
            None => {
                std::io::stdout().write_all(self.buf.as_bytes())?;
                Ok(())
            }
        }
    }
}

fn load_map(opts: &MapOpts, prec: u32) -> Result<CircleLift, modelock::Error> {
    let spec = match (&opts.map, &opts.map_file) {
        (Some(s), None) => s.clone(),
        (None, Some(path)) => std::fs::read_to_string(path)?,
        _ => {
            return Err(modelock::Error::Config(
                "exactly one of --map / --map-file is required".into(),
            ))
        }
    };
    parse_map(&spec, prec)
}

fn setup(common: &CommonOpts) -> Result<PrecisionPolicy, modelock::Error> {
    if let Some(jobs) = common.jobs {
        if jobs == 0 {
            return Err(modelock::Error::Config("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| modelock::Error::Config(e.to_string()))?;
    }
    if common.tol <= 0.0 {
        return Err(modelock::Error::Config("--tol must be positive".into()));
    }
    Ok(if common.auto_precision {
        PrecisionPolicy {
            base_bits: common.precision_bits,
            ..PrecisionPolicy::default()
        }
    } else {
        PrecisionPolicy::fixed(common.precision_bits)
    })
}

fn out(common: &CommonOpts) -> Output {
    Output {
        path: common.out.clone(),
        buf: String::new(),
    }
}

fn parse_frac(s: &str) -> Result<(i64, u64), modelock::Error> {
    let (p, q) = s
        .split_once('/')
        .ok_or_else(|| modelock::Error::Parse(format!("expected P/Q, got {s:?}")))?;
    Ok((
        p.trim()
            .parse()
            .map_err(|_| modelock::Error::Parse(format!("bad numerator {p:?}")))?,
        q.trim()
            .parse()
            .map_err(|_| modelock::Error::Parse(format!("bad denominator {q:?}")))?,
    ))
}

fn write_plot(csv_path: &Option<PathBuf>, plot: bool, body: &str) -> Result<(), modelock::Error> {
    if !plot {
        return Ok(());
    }
    let Some(csv) = csv_path else {
        return Err(modelock::Error::Config(
            "--plot requires --out so the script can reference the CSV".into(),
        ));
    };
    let gp = csv.with_extension("gp");
    let data = csv.file_name().unwrap().to_string_lossy().into_owned();
    std::fs::write(gp, body.replace("{DATA}", &data))?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, modelock::Error> {
    match cli.command {
        Command::Staircase {
            map,
            common,
            range,
            samples,
            q,
        } => {
            let policy = setup(&common)?;
            let prec = policy.effective_bits(q);
            let base = load_map(&map, prec)?;
            let lo = eval_expr(&range[0], prec)?;
            let hi = eval_expr(&range[1], prec)?;
            let grid = common.grid.unwrap_or_else(|| default_grid(q));
            let pts = staircase(&base, &lo, &hi, samples, q, grid, common.tol, prec)?;
            let mut o = out(&common);
            o.line(&format!("# modelock staircase q={q} samples={samples} precision_bits={prec} tol={}", common.tol));
            o.line("t,trans_lo,trans_hi");
            for p in &pts {
                o.line(&format!(
                    "{},{},{}",
                    shortest_string(&p.t),
                    shortest_string(&p.trans.lo),
                    shortest_string(&p.trans.hi)
                ));
            }
            o.finish()?;
            write_plot(
                &common.out,
                common.plot,
                "set datafile separator ','\nset xlabel 't'\nset ylabel 'Trans(F_t)'\nplot '{DATA}' skip 2 using 1:2 with lines title 'lower', '{DATA}' skip 2 using 1:3 with lines title 'upper'\n",
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Tongue { map, common, frac } => {
            let (p, q) = parse_frac(&frac)?;
            let policy = setup(&common)?;
            let prec = policy.effective_bits(q);
            let base = load_map(&map, prec)?;
            let seed = Float::with_val(prec, p) / Float::with_val(prec, q);
            let rec = plateau(&base, p, q, &seed, common.tol, prec)?;
            let mut o = out(&common);
            o.line(&format!(
                "# modelock tongue precision_bits={prec} tol={}",
                common.tol
            ));
            o.line("p,q,t_minus,t_plus,width,flag");
            o.line(&format!(
                "{},{},{},{},{},{}",
                rec.p,
                rec.q,
                shortest_string(&rec.t_minus),
                shortest_string(&rec.t_plus),
                shortest_string(&rec.width),
                rec.flag
            ));
            o.finish()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Tongues2d {
            common,
            range,
            a_range,
            a_samples,
            q_max,
        } => {
            let policy = setup(&common)?;
            let prec = policy.effective_bits(q_max);
            let t_lo: f64 = range[0]
                .parse()
                .map_err(|_| modelock::Error::Parse("bad range".into()))?;
            let t_hi: f64 = range[1]
                .parse()
                .map_err(|_| modelock::Error::Parse("bad range".into()))?;
            let a_lo = eval_expr(&a_range[0], prec)?;
            let a_hi = eval_expr(&a_range[1], prec)?;
            let slices = tongues_2d(
                t_lo, t_hi, &a_lo, &a_hi, a_samples, q_max, common.tol, prec,
            )?;
            let mut o = out(&common);
            o.line(&format!(
                "# modelock tongues2d q_max={q_max} a_samples={a_samples} precision_bits={prec} tol={}",
                common.tol
            ));
            o.line("p,q,a,t_minus,t_plus");
            let mut failures = 0usize;
            for s in &slices {
                match &s.outcome {
                    Ok(rec) => o.line(&format!(
                        "{},{},{},{},{}",
                        s.p,
                        s.q,
                        shortest_string(&s.a),
                        shortest_string(&rec.t_minus),
                        shortest_string(&rec.t_plus)
                    )),
                    Err(msg) => {
                        failures += 1;
                        o.line(&format!("# failed p={} q={} a={}: {msg}", s.p, s.q, shortest_string(&s.a)));
                    }
                }
            }
            o.finish()?;
            write_plot(
                &common.out,
                common.plot,
                "set datafile separator ','\nset xlabel 't'\nset ylabel 'a'\nplot '{DATA}' skip 2 using 4:3 with points title 't-', '{DATA}' skip 2 using 5:3 with points title 't+'\n",
            )?;
            Ok(if failures > 0 {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Modulus {
            map,
            common,
            theta,
            depth,
            k_max,
            fit,
        } => {
            let policy = setup(&common)?;
            let prec = policy.effective_bits(depth);
            let base = load_map(&map, prec)?;
            let th = eval_expr(&theta, prec)?;
            let n_grid = common.grid.unwrap_or(4 * k_max.max(32)).max(4 * k_max);
            let phi = birkhoff_phi(&base, &th, depth, n_grid, prec);
            let coeffs = conjugacy_fourier(&phi, k_max)?;
            let (k_lo, k_hi) = match &fit {
                Some(w) => (w[0], w[1]),
                None => (2.min(k_max), (k_max / 2).max(3)),
            };
            let est = modulus_estimate(&coeffs, k_lo, k_hi)?;
            let mut o = out(&common);
            o.line(&format!(
                "# modelock modulus depth={depth} n_grid={n_grid} precision_bits={prec}"
            ));
            o.line(&format!(
                "# tau_hat={} residual={} k_lo={} k_hi={} sentinel_infinite={}",
                est.tau_hat, est.residual, est.k_lo, est.k_hi, est.sentinel_infinite
            ));
            o.line("k,re_ck,im_ck,log_abs_ck");
            for (k, c) in &coeffs {
                let mag = c.abs();
                let log_abs = if mag.is_zero() {
                    "-inf".to_string()
                } else {
                    shortest_string(&mag.ln())
                };
                o.line(&format!(
                    "{},{},{},{}",
                    k,
                    shortest_string(&c.re),
                    shortest_string(&c.im),
                    log_abs
                ));
            }
            o.finish()?;
            write_plot(
                &common.out,
                common.plot,
                "set datafile separator ','\nset xlabel 'k'\nset ylabel 'log|c_k|'\nplot '{DATA}' skip 3 using 1:4 with points title 'spectrum'\n",
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Decay {
            map,
            common,
            theta,
            n_max,
            tau,
        } => {
            let policy = setup(&common)?;
            let prec = 256.max(common.precision_bits);
            let base = load_map(&map, prec)?;
            let th = eval_expr(&theta, prec)?;
            // tau source order: CLI > univalence oracle > Fourier fit.
            let (tau_used, source) = match (tau, &base) {
                (Some(v), _) => (v, "cli"),
                (None, CircleLift::ConjugatedRotation { epsilon, .. }) => {
                    (univalence_oracle_tau(epsilon.to_f64(), 256), "oracle")
                }
                (None, _) => {
                    let phi = birkhoff_phi(&base, &th, 34, 128, prec.min(256));
                    let coeffs = conjugacy_fourier(&phi, 16)?;
                    (modulus_estimate(&coeffs, 2, 8)?.tau_hat, "fourier")
                }
            };
            let bound = -2.0 * std::f64::consts::PI * tau_used;
            let slack = 0.25 * bound.abs();
            let rep = decay_report(&base, &th, n_max, tau_used, slack, &policy)?;
            let mut o = out(&common);
            o.line(&format!(
                "# modelock decay theta={theta} n_max={n_max} base_bits={} auto_precision={}",
                common.precision_bits, common.auto_precision
            ));
            o.line(&format!(
                "# tau_reference={tau_used} source={source} bound={bound} slack={slack} (slack is an engineering convention, 25% of the bound)"
            ));
            o.line("n,p,q,width,slope,gap,ratio,precision_bits,flag");
            let mut failures = 0usize;
            for r in &rep.rows {
                if r.failure.is_some() {
                    failures += 1;
                    o.line(&format!(
                        "# failed n={} p={} q={}: {}",
                        r.n,
                        r.p,
                        r.q,
                        r.failure.as_deref().unwrap()
                    ));
                    continue;
                }
                let slope = r.slope.map_or("-inf".into(), |s| format!("{s}"));
                let ratio = r.corollary_ratio.map_or("0".into(), |s| format!("{s}"));
                o.line(&format!(
                    "{},{},{},{},{},{},{},{},{}",
                    r.n,
                    r.p,
                    r.q,
                    shortest_string(&r.width),
                    slope,
                    shortest_string(&r.gap),
                    ratio,
                    r.precision_bits,
                    r.flag
                ));
            }
            if let Ok(chk) = corollary_check(&rep) {
                o.line(&format!(
                    "# corollary: ratio_decreasing_last_half={} width_q2_bounded={}",
                    chk.decreasing_last_half, chk.width_q2_bounded
                ));
            }
            o.finish()?;
            write_plot(
                &common.out,
                common.plot,
                "set datafile separator ','\nset xlabel 'q_n'\nset ylabel '(1/q_n) log width'\nplot '{DATA}' skip 3 using 3:5 with linespoints title 'slope'\n",
            )?;
            Ok(if failures > 0 {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Convergents {
            common,
            theta,
            n_max,
        } => {
            let policy = setup(&common)?;
            let prec = policy
                .effective_bits(1)
                .max(common.precision_bits)
                .max(4 * (n_max as u32 + 2));
            let th = eval_expr(&theta, prec)?;
            let cf = cf_expand(&th, n_max, prec)?;
            let mut o = out(&common);
            o.line(&format!(
                "# modelock convergents theta={theta} precision_bits={prec} terminated={} precision_flagged={}",
                cf.terminated, cf.precision_flagged
            ));
            o.line("n,p,q,gap");
            for (n, r) in cf.convergents.iter().enumerate() {
                let gap = (th.clone() - r.to_float(prec)).abs();
                o.line(&format!("{},{},{},{}", n, r.p, r.q, shortest_string(&gap)));
            }
            o.finish()?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
