use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use chinampa::algebra::{normalize_e, StimulusConfig};
use chinampa::cascade::{default_horizon, parse_stimuli, stimuli_to_json};
use chinampa::enumeration::{
    closed_form, count_chinampas, egf_expand, profit0_closed_form, verify_family, Family,
    StackProfile,
};
use chinampa::persistence::{self, schedule_infinite, synfire_schedule, verify_persistence};
use chinampa::pyramid::{factorize, will_vertex_be_activated};
use chinampa::render::{render_ascii, render_svg};
use chinampa::triangular::{enumerate_triseq, expand_rational_series, list_triseq};
use chinampa::{activation_closure, make_path, ActivationDiagram, Error, Network, StimulusSet};

#[derive(Parser)]
#[command(
    name = "chinampa",
    version,
    about = "Threshold cascades on networks and their pyramid combinatorics"
)]
struct Cli {
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderFormat {
    Ascii,
    Svg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Profit0,
    Profit1,
    Pyr2,
    Triseq,
}

#[derive(Subcommand)]
enum Command {
    /// Activation closure as JSON, optionally followed by a picture.
    Simulate {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        stimuli: PathBuf,
        #[arg(long)]
        horizon: Option<u32>,
        #[arg(long)]
        render: Option<RenderFormat>,
    },
    /// Whether vertex V of a path fires at time T.
    Query {
        #[arg(long)]
        stimuli: PathBuf,
        vertex: u32,
        time: u32,
    },
    /// Pyramid factorization of a chinampa on a path.
    Factorize {
        #[arg(long)]
        stimuli: PathBuf,
        /// Path width; defaults to the largest stimulated vertex.
        #[arg(long)]
        width: Option<u32>,
    },
    /// Brute-force counts against closed forms, as TSV.
    Count {
        /// Canvas size, or the last index of a family.
        #[arg(long)]
        n: u32,
        #[arg(long, conflicts_with = "family")]
        profile: Option<StackProfile>,
        #[arg(long)]
        family: Option<FamilyArg>,
        #[arg(long = "R")]
        r: Option<u32>,
    },
    /// Closed-form coefficients, one `n<TAB>value` line each.
    Series {
        #[arg(long)]
        family: FamilyArg,
        #[arg(long, default_value_t = 16)]
        terms: usize,
        #[arg(long = "R")]
        r: Option<u32>,
    },
    /// Triangular sequences for given R and K.
    Triseq {
        #[arg(long = "R")]
        r: u32,
        #[arg(long = "K", default_value_t = 0)]
        k: u32,
        #[arg(long, conflicts_with_all = ["count", "series"])]
        list: bool,
        #[arg(long, conflicts_with = "series")]
        count: bool,
        /// Print the generating series up to this degree.
        #[arg(long)]
        series: Option<usize>,
    },
    /// Schedule that keeps a vertex set firing, checked by simulation.
    Persist {
        #[arg(long)]
        network: PathBuf,
        /// Comma-separated vertices.
        #[arg(long, value_delimiter = ',')]
        set: Vec<u32>,
        #[arg(long)]
        horizon: Option<u32>,
    },
    /// Drops redundant primaries.
    Normalize {
        #[arg(long)]
        stimuli: PathBuf,
        #[arg(long)]
        width: u32,
    },
    /// Picture of an activation diagram.
    Render {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        stimuli: PathBuf,
        #[arg(long)]
        horizon: Option<u32>,
        #[arg(long, default_value = "ascii")]
        render: RenderFormat,
    },
}

enum Failure {
    Input(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Domain(e.to_string())
        }
    }
}

type Out = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_network(path: &Path) -> Result<Network, Failure> {
    let net = Network::from_json_str(&read(path)?)?;
    if let Some(v) = net.validate().first() {
        return Err(Failure::Input(format!("{}: {v}", path.display())));
    }
    Ok(net)
}

fn load_stimuli(path: &Path) -> Result<StimulusSet, Failure> {
    Ok(parse_stimuli(&read(path)?)?)
}

fn diagram(
    network: &Path,
    stimuli: &Path,
    horizon: Option<u32>,
) -> Result<ActivationDiagram, Failure> {
    let net = load_network(network)?;
    let s = load_stimuli(stimuli)?;
    let h = horizon.unwrap_or_else(|| default_horizon(&net, &s));
    Ok(activation_closure(&net, &s, h)?)
}

fn picture(d: &ActivationDiagram, format: RenderFormat) -> String {
    match format {
        RenderFormat::Ascii => render_ascii(d),
        RenderFormat::Svg => render_svg(d),
    }
}

fn json_line(v: &serde_json::Value) -> String {
    serde_json::to_string(v).expect("json") + "\n"
}

fn simulate(
    network: &Path,
    stimuli: &Path,
    horizon: Option<u32>,
    render: Option<RenderFormat>,
) -> Out {
    let d = diagram(network, stimuli, horizon)?;
    let mut out = json_line(&d.to_json());
    if let Some(f) = render {
        out.push_str(&picture(&d, f));
    }
    Ok(out)
}

fn query(stimuli: &Path, v: u32, t: u32) -> Out {
    let s = load_stimuli(stimuli)?;
    Ok(format!("{}\n", will_vertex_be_activated(v, t, &s)))
}

fn factorize_cmd(stimuli: &Path, width: Option<u32>) -> Out {
    let s = load_stimuli(stimuli)?;
    let w = width.unwrap_or_else(|| s.iter().map(|x| x.vertex).max().unwrap_or(1));
    let net = make_path(w)?;
    let d = activation_closure(&net, &s, default_horizon(&net, &s))?;
    Ok(json_line(&factorize(&d)?.to_json()))
}

fn need_r(r: Option<u32>) -> Result<u32, Failure> {
    match r {
        None => Err(Failure::Input(
            "--R is required for the triseq family".into(),
        )),
        Some(0) => Err(Failure::Domain("R must be positive".into())),
        Some(r) => Ok(r),
    }
}

fn count(n: u32, profile: Option<StackProfile>, family: Option<FamilyArg>, r: Option<u32>) -> Out {
    let mut out = String::from("n\tprofile\tbrute_force\tclosed_form\tmatch\n");
    let mut row = |n: u32, p: &dyn std::fmt::Display, brute: String, closed: Option<String>| {
        let (c, m) = match closed {
            Some(c) => {
                let m = c == brute;
                (c, m.to_string())
            }
            None => ("-".to_string(), "-".to_string()),
        };
        writeln!(out, "{n}\t{p}\t{brute}\t{c}\t{m}").unwrap();
    };
    match (profile, family) {
        (Some(p), _) => {
            let brute = count_chinampas(n, &p)?;
            row(
                n,
                &p,
                brute.to_string(),
                closed_form(n, &p).map(|c| c.to_string()),
            );
        }
        (None, Some(FamilyArg::Triseq)) => {
            let r = need_r(r)?;
            let shift = 2 * r as usize - 1;
            let series = expand_rational_series(r, shift + n as usize)?;
            for k in 0..=n {
                let brute = enumerate_triseq(k, r)?;
                row(
                    k,
                    &format!("R={r}"),
                    brute.to_string(),
                    Some(series[shift + k as usize].to_string()),
                );
            }
        }
        (None, Some(f)) => {
            let (fam, lo) = match f {
                FamilyArg::Profit0 => (Family::Profit0, 0),
                FamilyArg::Profit1 => (Family::Profit1, 0),
                _ => (Family::Pyr2Chains, 2),
            };
            if n < lo {
                return Err(Failure::Domain(format!("family starts at n = {lo}")));
            }
            for fr in verify_family(fam, lo..=n)? {
                row(
                    fr.n,
                    &fr.profile,
                    fr.brute_force.to_string(),
                    Some(fr.closed_form.to_string()),
                );
            }
        }
        (None, None) => return Err(Failure::Input("give --profile or --family".into())),
    }
    Ok(out)
}

fn series(family: FamilyArg, terms: usize, r: Option<u32>) -> Out {
    let values: Vec<String> = match family {
        FamilyArg::Triseq => {
            if terms == 0 {
                Vec::new()
            } else {
                expand_rational_series(need_r(r)?, terms - 1)?
                    .iter()
                    .map(|c| c.to_string())
                    .collect()
            }
        }
        FamilyArg::Profit0 => (0..terms as u32)
            .map(|n| profit0_closed_form(n).to_string())
            .collect(),
        FamilyArg::Profit1 => {
            let p = [4, 18, 9].map(num_bigint_from);
            egf_expand(&p, 2, 2, terms)?
                .iter()
                .map(|c| c.to_string())
                .collect()
        }
        FamilyArg::Pyr2 => (0..terms)
            .map(|n| {
                if n < 2 {
                    "0".into()
                } else {
                    (num_bigint_from(1) << (n - 2)).to_string()
                }
            })
            .collect(),
    };
    Ok(values
        .iter()
        .enumerate()
        .map(|(n, v)| format!("{n}\t{v}\n"))
        .collect())
}

fn num_bigint_from(x: i64) -> num_bigint::BigInt {
    num_bigint::BigInt::from(x)
}

fn triseq(r: u32, k: u32, list: bool, series: Option<usize>) -> Out {
    if r == 0 {
        return Err(Failure::Domain("R must be positive".into()));
    }
    if let Some(n) = series {
        let c = expand_rational_series(r, n)?;
        return Ok(c
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{i}\t{v}\n"))
            .collect());
    }
    if list {
        let seqs = list_triseq(k, r);
        return Ok(seqs
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join("\n"));
    }
    Ok(format!("{}\n", enumerate_triseq(k, r)?))
}

fn persist(network: &Path, set: &[u32], horizon: Option<u32>) -> Out {
    let net = load_network(network)?;
    let set: BTreeSet<u32> = set.iter().copied().collect();
    let sched = schedule_infinite(&net, &set)?;
    let baseline = synfire_schedule(&net, &set)?;
    let h = horizon.unwrap_or_else(|| persistence::default_horizon(sched.m));
    let ok = verify_persistence(&net, &sched.stimuli, &set, h)?;
    Ok(format!(
        "M\t{}\nstimuli\t{}\nbaseline\t{}\npersists\t{ok}\n",
        sched.m,
        sched.stimuli.len(),
        baseline.len()
    ))
}

fn normalize(stimuli: &Path, width: u32) -> Out {
    let a = StimulusConfig::new(width, load_stimuli(stimuli)?)?;
    let e = normalize_e(&a);
    Ok(json_line(&serde_json::json!({
        "normalized": stimuli_to_json(&e.stimuli),
        "redundant": e != a,
    })))
}

fn run(cmd: Command) -> Out {
    match cmd {
        Command::Simulate {
            network,
            stimuli,
            horizon,
            render,
        } => simulate(&network, &stimuli, horizon, render),
        Command::Query {
            stimuli,
            vertex,
            time,
        } => query(&stimuli, vertex, time),
        Command::Factorize { stimuli, width } => factorize_cmd(&stimuli, width),
        Command::Count {
            n,
            profile,
            family,
            r,
        } => count(n, profile, family, r),
        Command::Series { family, terms, r } => series(family, terms, r),
        Command::Triseq {
            r,
            k,
            list,
            count: _,
            series: s,
        } => triseq(r, k, list, s),
        Command::Persist {
            network,
            set,
            horizon,
        } => persist(&network, &set, horizon),
        Command::Normalize { stimuli, width } => normalize(&stimuli, width),
        Command::Render {
            network,
            stimuli,
            horizon,
            render,
        } => Ok(picture(&diagram(&network, &stimuli, horizon)?, render)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (text, code) = match run(cli.command) {
        Ok(text) => (text, 0),
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
        Err(Failure::Domain(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(3);
        }
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(code)
}
