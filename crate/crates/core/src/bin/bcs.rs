use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bcs_core::attack::{recover_key, AttackInstance, RecoverOptions};
use bcs_core::certs::{certify_instance, gaussian_indistinguishability_test};
use bcs_core::complexcore::textfmt::{format_real, write_cmat, write_cvec, TextReader};
use bcs_core::complexcore::{CVec, Rng};
use bcs_core::deconv::{hihtp_decrypt, BisparsePattern, HihtpOptions};
use bcs_core::harness::{run_grid, ExperimentGrid, GridRun};
use bcs_core::scheme::{encrypt, keygen, Cyphertext, FilterDistribution, FilterKind, Key, SparseVector};
use bcs_core::{Error, Result};

#[derive(Parser)]
#[command(name = "bcs", version, about = "Bilinear compressive security toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a Gaussian key.
    Keygen {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encrypt a plaintext vector with a freshly drawn filter.
    Encrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        plaintext: PathBuf,
        /// dense | sparse:SIGMA | unitphase
        #[arg(long, default_value = "dense")]
        dist: FilterKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover (h, x) from a cyphertext. Exits 1 when not converged.
    Decrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        cyphertext: PathBuf,
        #[arg(long)]
        sigma: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 200)]
        max_iters: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Known-plaintext key recovery on an instance file.
    Attack {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Ground-truth key, for relative error and success.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Write the recovered key here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Non-retrievability report for a plaintext set.
    Certify {
        #[arg(long)]
        plaintexts: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: usize,
    },
    /// Moment test: key vs. its Fourier row-phase modification.
    Indist {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        plaintext: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        n_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte-Carlo grid of key-recovery trials.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, conflicts_with_all = ["n", "m", "m_list", "s_list"])]
    preset: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long = "M-list", value_delimiter = ',')]
    m_list: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    s_list: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn reader(path: &Path) -> Result<TextReader<BufReader<File>>> {
    Ok(TextReader::new(BufReader::new(File::open(path)?)))
}

fn read_key(path: &Path) -> Result<Key> {
    Ok(Key::new(reader(path)?.read_cmat()?))
}

fn read_vec(path: &Path) -> Result<CVec> {
    reader(path)?.read_cvec()
}

/// Runs `f` against the output file, or stdout when no path is given.
fn with_output(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    match out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
        }
    }
    Ok(())
}

fn print_summary(run: &GridRun) {
    println!("M,s,trials,successes,success_rate,mean_rel_error");
    for c in &run.summary.cells {
        println!(
            "{},{},{},{},{},{}",
            c.big_m,
            c.s,
            c.trials,
            c.successes,
            format_real(c.success_rate),
            format_real(c.mean_rel_error)
        );
    }
}

fn experiment(a: ExperimentArgs) -> Result<ExitCode> {
    let mut grid = match (&a.preset, a.n, a.m, a.m_list, a.s_list) {
        (Some(p), ..) => ExperimentGrid::preset(p)?,
        (None, Some(n), Some(m), Some(ml), Some(sl)) => ExperimentGrid::new(n, m, ml, sl),
        _ => {
            return Err(Error::InvalidArgument(
                "give --preset, or all of --n --m --M-list --s-list".into(),
            ))
        }
    };
    if let Some(t) = a.trials {
        grid.trials = t;
    }
    if let Some(s) = a.seed {
        grid.seed = s;
    }
    if let Some(r) = a.restarts {
        grid.restarts = r;
    }
    match run_grid(&grid, a.jobs, a.out.as_deref()) {
        Ok(run) => {
            print_summary(&run);
            Ok(ExitCode::SUCCESS)
        }
        Err(Error::Sentinel(run)) => {
            print_summary(&run);
            for v in &run.violations {
                eprintln!(
                    "sentinel: M={} s={}: {}/{} certified trials succeeded",
                    v.big_m, v.s, v.certified_successes, v.certified_trials
                );
            }
            eprintln!("error: {}", Error::Sentinel(run));
            Ok(ExitCode::from(3))
        }
        Err(e) => Err(e),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Command::Keygen { m, n, seed, out } => {
            let key = keygen(m, n, &mut Rng::new(seed))?;
            with_output(out.as_deref(), |w| write_cmat(w, key.matrix()))?;
        }
        Command::Encrypt { key, plaintext, dist, seed, out } => {
            let key = read_key(&key)?;
            let x = SparseVector::from_dense(&read_vec(&plaintext)?)?;
            let d = FilterDistribution::new(dist, key.m())?;
            let (y, _) = encrypt(&key, &x, &d, &mut Rng::new(seed))?;
            with_output(out.as_deref(), |w| write_cvec(w, y.as_vec()))?;
        }
        Command::Decrypt { key, cyphertext, sigma, s, max_iters, out } => {
            let key = read_key(&key)?;
            let y = Cyphertext(read_vec(&cyphertext)?);
            let opts = HihtpOptions { max_iters, ..Default::default() };
            let r = hihtp_decrypt(&y, &key, BisparsePattern::new(sigma, s)?, &opts)?;
            with_output(out.as_deref(), |w| {
                writeln!(w, "# residual {}", r.residual)?;
                writeln!(w, "# iterations {}", r.iterations)?;
                writeln!(w, "# converged {}", r.converged)?;
                write_cvec(w, &r.h_hat)?;
                write_cvec(w, &r.x_hat)
            })?;
            if !r.converged {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Attack { instance, m, n, restarts, seed, truth, out } => {
            let inst = AttackInstance::read(BufReader::new(File::open(&instance)?))?;
            if (inst.m(), inst.n()) != (m, n) {
                return Err(Error::Dimension(format!(
                    "instance is for m={} n={}, got --m {m} --n {n}",
                    inst.m(),
                    inst.n()
                )));
            }
            let truth = truth.as_deref().map(read_key).transpose()?;
            let opts = RecoverOptions { restarts, ..Default::default() };
            let r = recover_key(&inst, &opts, &mut Rng::new(seed), truth.as_ref())?;
            println!("final_loss {}", r.final_loss);
            if let Some(e) = r.rel_error_mod_phase {
                println!("rel_error {e}");
            }
            if let Some(ok) = r.success {
                println!("success {}", u8::from(ok));
            }
            println!("iterations {}", r.iterations);
            println!("restarts_used {}", r.restarts_used);
            println!("termination {:?}", r.termination);
            if let Some(p) = out {
                with_output(Some(&p), |w| write_cmat(w, &r.q_hat))?;
            }
        }
        Command::Certify { plaintexts, n, s } => {
            let xs = reader(&plaintexts)?
                .read_all_cvecs()?
                .iter()
                .map(SparseVector::from_dense)
                .collect::<Result<Vec<_>>>()?;
            print!("{}", certify_instance(&xs, n, s)?);
        }
        Command::Indist { key, plaintext, n_samples, seed } => {
            let key = read_key(&key)?;
            let x = SparseVector::from_dense(&read_vec(&plaintext)?)?;
            let mut rng = Rng::new(seed);
            let phases = CVec::new((0..key.m()).map(|_| rng.unit_phase()).collect())?;
            let report = gaussian_indistinguishability_test(&key, &x, &phases, n_samples, &mut rng)?;
            print!("{report}");
            if !report.pass {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Experiment(a) => return experiment(a),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
