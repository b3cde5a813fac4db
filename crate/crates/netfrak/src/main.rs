use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use netfrak::envelope::{envelope_verdict, pointwise_envelope, EnvelopeConfig};
use netfrak::error::Error;
use netfrak::geometry::{grid_points, LinearNetwork, PointPattern};
use netfrak::intensity::{fit_intensity, rho_bar, Bandwidth, IntensitySurface, DEFAULT_FLOOR_EPS};
use netfrak::io::{
    read_network_csv, read_pattern_csv, write_envelope_csv, write_intensity_csv,
    write_pattern_csv, write_summary_csv, RunManifest,
};
use netfrak::metric::{global_r_max, ShortestPathMetric};
use netfrak::simulate::{
    lgcp, poisson_homogeneous, poisson_inhomogeneous, replicate_rng, ssi, thin, GaussianFieldSpec,
};
use netfrak::summaries::{
    default_r_grid, estimate_statistic, IntensityMode, SummaryKind, DEFAULT_NR, DEFAULT_RMAX_FRAC,
};
use netfrak::svg::{write_svg, Curve, Plot, Reference};
use netfrak::Result;

#[derive(Parser)]
#[command(name = "netfrak", version, about = "Point patterns on linear networks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a network CSV and print its basic description.
    Validate {
        #[arg(long)]
        net: PathBuf,
    },
    /// Geodesic distance between two planar points snapped to the network.
    Distance {
        #[arg(long)]
        net: PathBuf,
        #[arg(long, value_parser = parse_xy, allow_hyphen_values = true)]
        from: [f64; 2],
        #[arg(long, value_parser = parse_xy, allow_hyphen_values = true)]
        to: [f64; 2],
        #[arg(long)]
        tol: f64,
    },
    /// Simulate replicate point patterns from a generative model.
    Simulate {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        model: String,
        /// Model parameters as KEY=VAL pairs.
        #[arg(long = "params", value_parser = parse_kv)]
        params: Vec<(String, String)>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        reps: u64,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
    /// Fit and export a kernel intensity surface.
    Intensity {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_parser = parse_bandwidth, default_value = "scott")]
        bandwidth: Bandwidth,
        #[arg(long = "grid-spacing")]
        grid_spacing: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate a summary statistic curve (F, H, J or K).
    Summary {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_parser = parse_stat)]
        stat: SummaryKind,
        #[arg(long, value_parser = parse_mode, default_value = "inhom")]
        mode: IntensityMode,
        #[arg(long = "grid-spacing")]
        grid_spacing: Option<f64>,
        #[arg(long = "rmax-frac", default_value_t = DEFAULT_RMAX_FRAC)]
        rmax_frac: f64,
        #[arg(long, default_value_t = DEFAULT_NR)]
        nr: usize,
        #[arg(long, value_parser = parse_bandwidth, default_value = "scott")]
        bandwidth: Bandwidth,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Pointwise Monte Carlo envelope test under a fitted Poisson null.
    Envelope {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_parser = parse_stat)]
        stat: SummaryKind,
        #[arg(long, value_parser = parse_mode, default_value = "inhom")]
        mode: IntensityMode,
        #[arg(long, default_value_t = 99)]
        nsim: usize,
        #[arg(long, default_value_t = 1)]
        rank: usize,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        refit: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "grid-spacing")]
        grid_spacing: Option<f64>,
        #[arg(long = "rmax-frac", default_value_t = DEFAULT_RMAX_FRAC)]
        rmax_frac: f64,
        #[arg(long, default_value_t = DEFAULT_NR)]
        nr: usize,
        #[arg(long, value_parser = parse_bandwidth, default_value = "scott")]
        bandwidth: Bandwidth,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    pattern: PathBuf,
    /// Snapping tolerance for pattern points; defaults to 1e-3 of the
    /// network bounding-box diameter.
    #[arg(long)]
    tol: Option<f64>,
}

fn parse_xy(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected x,y, got {s:?}"));
    }
    let x = parts[0].trim().parse().map_err(|_| format!("bad x in {s:?}"))?;
    let y = parts[1].trim().parse().map_err(|_| format!("bad y in {s:?}"))?;
    Ok([x, y])
}

fn parse_kv(s: &str) -> std::result::Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
        None => Err(format!("expected KEY=VAL, got {s:?}")),
    }
}

fn parse_bandwidth(s: &str) -> std::result::Result<Bandwidth, String> {
    if s.eq_ignore_ascii_case("scott") {
        Ok(Bandwidth::Scott)
    } else {
        s.parse::<f64>()
            .map(Bandwidth::Fixed)
            .map_err(|_| format!("expected 'scott' or a number, got {s:?}"))
    }
}

fn parse_stat(s: &str) -> std::result::Result<SummaryKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "f" => Ok(SummaryKind::F),
        "g" | "h" => Ok(SummaryKind::H),
        "j" => Ok(SummaryKind::J),
        "k" => Ok(SummaryKind::K),
        _ => Err(format!("expected one of f|g|j|k, got {s:?}")),
    }
}

fn parse_mode(s: &str) -> std::result::Result<IntensityMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "inhom" => Ok(IntensityMode::Inhomogeneous),
        "hom" => Ok(IntensityMode::Homogeneous),
        _ => Err(format!("expected inhom or hom, got {s:?}")),
    }
}

fn load_data(args: &DataArgs) -> Result<(LinearNetwork, PointPattern, f64)> {
    let net = read_network_csv(&args.net)?;
    let tol = args.tol.unwrap_or(1e-3 * net.diameter());
    let pattern = read_pattern_csv(&args.pattern, &net, tol)?;
    Ok((net, pattern, tol))
}

struct Fitted {
    surface: IntensitySurface,
    rho_bar: f64,
}

fn fit(
    net: &LinearNetwork,
    pattern: &PointPattern,
    mode: IntensityMode,
    bandwidth: Bandwidth,
    grid: &[netfrak::NetworkLocation],
) -> Result<Fitted> {
    match mode {
        IntensityMode::Homogeneous => Ok(Fitted {
            surface: IntensitySurface::constant(net, pattern.len()),
            rho_bar: pattern.len() as f64 / net.total_length(),
        }),
        IntensityMode::Inhomogeneous => {
            let surface = fit_intensity(net, pattern, bandwidth)?;
            let rb = rho_bar(net, &surface, grid, DEFAULT_FLOOR_EPS)?;
            Ok(Fitted {
                surface,
                rho_bar: rb.value,
            })
        }
    }
}

fn get_param(params: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    params
        .get(key)
        .ok_or_else(|| Error::Format(format!("missing model parameter {key}")))?
        .parse()
        .map_err(|_| Error::Format(format!("model parameter {key} is not a number")))
}

fn get_param_or(params: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None => Ok(default),
        Some(_) => get_param(params, key),
    }
}

fn mode_name(mode: IntensityMode) -> &'static str {
    match mode {
        IntensityMode::Inhomogeneous => "inhom",
        IntensityMode::Homogeneous => "hom",
    }
}

fn bandwidth_name(bw: Bandwidth) -> String {
    match bw {
        Bandwidth::Scott => "scott".to_string(),
        Bandwidth::Fixed(v) => v.to_string(),
    }
}

fn run(cli: Cli) -> Result<()> {
    let metric = ShortestPathMetric;
    match cli.cmd {
        Cmd::Validate { net } => {
            let network = read_network_csv(&net)?;
            println!(
                "{} segments and {} nodes",
                network.segments().len(),
                network.vertices().len()
            );
            println!("total length {}", network.total_length());
            println!("boundary nodes {}", network.boundary_vertices().len());
        }
        Cmd::Distance { net, from, to, tol } => {
            let network = read_network_csv(&net)?;
            let u = netfrak::snap_to_network(&network, from, tol)?;
            let v = netfrak::snap_to_network(&network, to, tol)?;
            println!("{}", netfrak::shortest_path_distance(&network, u, v));
        }
        Cmd::Simulate {
            net,
            model,
            params,
            seed,
            reps,
            out_dir,
        } => {
            let start = Instant::now();
            let network = read_network_csv(&net)?;
            let params: BTreeMap<String, String> = params.into_iter().collect();
            std::fs::create_dir_all(&out_dir)?;
            let mut manifest = RunManifest::new("simulate");
            manifest.seed = Some(seed);
            manifest.param("model", &model).param("reps", reps);
            for (k, v) in &params {
                manifest.param(&format!("params.{k}"), v);
            }
            manifest.input(&net)?;
            let mut partial_reps = Vec::new();
            for rep in 0..reps {
                let mut rng = replicate_rng(seed, rep);
                let pattern = match model.as_str() {
                    "poisson" => {
                        let rho = get_param(&params, "rho")?;
                        poisson_homogeneous(&network, rho, &mut rng)
                    }
                    "ipoisson" => {
                        let rho0 = get_param(&params, "rho0")?;
                        let freq = get_param_or(&params, "freq", 1.0)?;
                        poisson_inhomogeneous(
                            &network,
                            |n, u| rho0 * (freq * u.to_xy(n)[0]).sin().abs(),
                            rho0,
                            &mut rng,
                        )?
                    }
                    "ssi-thin" => {
                        let n = get_param_or(&params, "n", 300.0)? as usize;
                        let delta_frac = get_param_or(&params, "delta-frac", 0.001)?;
                        let p = get_param_or(&params, "p", 0.3)?;
                        let max_attempts =
                            get_param_or(&params, "max-attempts", 10_000.0 * n as f64)? as usize;
                        let delta = delta_frac * network.total_length();
                        let out = ssi(&network, &metric, n, delta, max_attempts, &mut rng);
                        if !out.complete {
                            partial_reps.push(rep.to_string());
                        }
                        thin(&network, &out.pattern, |_, _| p, &mut rng)
                    }
                    "lgcp" => {
                        let rho0 = get_param(&params, "rho0")?;
                        let spacing =
                            get_param_or(&params, "spacing", network.total_length() / 500.0)?;
                        let var = get_param_or(&params, "var", 1.0)?;
                        let scale = get_param_or(&params, "scale", 1.0)?;
                        let (xmin, xmax) = network
                            .vertices()
                            .iter()
                            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                                (lo.min(v[0]), hi.max(v[0]))
                            });
                        let total = network.total_length();
                        let spec = GaussianFieldSpec {
                            mean: Box::new(move |x, _| {
                                rho0.ln() + (x - (xmax - xmin)) / total
                            }),
                            cov: Box::new(move |p, q| {
                                let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                                var * (-d / scale).exp()
                            }),
                            spacing,
                        };
                        lgcp(&network, &spec, &mut rng)?.pattern
                    }
                    other => {
                        return Err(Error::Format(format!(
                            "unknown model {other:?}; expected poisson|ipoisson|ssi-thin|lgcp"
                        )))
                    }
                };
                let path = out_dir.join(format!("pattern_{rep:03}.csv"));
                write_pattern_csv(&path, &network, &pattern)?;
            }
            if !partial_reps.is_empty() {
                manifest.param("partial_reps", partial_reps.join(" "));
            }
            manifest.duration_secs = start.elapsed().as_secs_f64();
            manifest.write(&out_dir.join("manifest.json"))?;
        }
        Cmd::Intensity {
            data,
            bandwidth,
            grid_spacing,
            out,
        } => {
            let start = Instant::now();
            let (network, pattern, tol) = load_data(&data)?;
            let spacing = grid_spacing.unwrap_or(network.total_length() / 200.0);
            let grid = grid_points(&network, spacing)?;
            let surface = fit_intensity(&network, &pattern, bandwidth)?;
            write_intensity_csv(&out, &network, &surface, &grid)?;
            let mut manifest = RunManifest::new("intensity");
            manifest
                .param("bandwidth", bandwidth_name(bandwidth))
                .param("grid-spacing", spacing)
                .param("tol", tol);
            manifest.input(&data.net)?.input(&data.pattern)?;
            manifest.duration_secs = start.elapsed().as_secs_f64();
            manifest.write(&manifest_path(&out))?;
        }
        Cmd::Summary {
            data,
            stat,
            mode,
            grid_spacing,
            rmax_frac,
            nr,
            bandwidth,
            out,
            svg,
        } => {
            let start = Instant::now();
            let (network, pattern, tol) = load_data(&data)?;
            let spacing = grid_spacing.unwrap_or(network.total_length() / 200.0);
            let grid = grid_points(&network, spacing)?;
            let r_bound = global_r_max(&network, &metric, &grid);
            let r_grid = default_r_grid(r_bound, rmax_frac, nr);
            let fitted = fit(&network, &pattern, mode, bandwidth, &grid)?;
            let est = estimate_statistic(
                &network,
                &metric,
                &pattern,
                &fitted.surface,
                fitted.rho_bar,
                &grid,
                &r_grid,
                r_bound,
                mode,
                stat,
            )?;
            write_summary_csv(&out, &est)?;
            if let Some(svg_path) = svg {
                let reference = match stat {
                    SummaryKind::J => Reference::UnitLevel,
                    SummaryKind::K => Reference::Diagonal,
                    _ => Reference::None,
                };
                write_svg(
                    &svg_path,
                    &Plot {
                        ylabel: stat.name(),
                        observed: Curve {
                            r: &est.r,
                            value: &est.value,
                        },
                        band: None,
                        reference,
                    },
                )?;
            }
            let mut manifest = RunManifest::new("summary");
            manifest
                .param("stat", stat.name())
                .param("mode", mode_name(mode))
                .param("grid-spacing", spacing)
                .param("rmax-frac", rmax_frac)
                .param("nr", nr)
                .param("bandwidth", bandwidth_name(bandwidth))
                .param("tol", tol);
            manifest.input(&data.net)?.input(&data.pattern)?;
            manifest.duration_secs = start.elapsed().as_secs_f64();
            manifest.write(&manifest_path(&out))?;
        }
        Cmd::Envelope {
            data,
            stat,
            mode,
            nsim,
            rank,
            refit,
            seed,
            grid_spacing,
            rmax_frac,
            nr,
            bandwidth,
            out,
            svg,
        } => {
            let start = Instant::now();
            let (network, pattern, tol) = load_data(&data)?;
            let cfg = EnvelopeConfig {
                stat,
                mode,
                nsim,
                rank,
                refit,
                seed,
                bandwidth,
                grid_spacing,
                rmax_frac,
                nr,
                floor_eps: DEFAULT_FLOOR_EPS,
            };
            let env = pointwise_envelope(&network, &metric, &pattern, &cfg)?;
            write_envelope_csv(&out, &env)?;
            println!("{}", envelope_verdict(&env));
            if let Some(svg_path) = svg {
                let reference = match stat {
                    SummaryKind::J => Reference::UnitLevel,
                    SummaryKind::K => Reference::Diagonal,
                    _ => Reference::None,
                };
                write_svg(
                    &svg_path,
                    &Plot {
                        ylabel: stat.name(),
                        observed: Curve {
                            r: &env.r,
                            value: &env.observed,
                        },
                        band: Some((
                            Curve {
                                r: &env.r,
                                value: &env.lo,
                            },
                            Curve {
                                r: &env.r,
                                value: &env.hi,
                            },
                        )),
                        reference,
                    },
                )?;
            }
            let mut manifest = RunManifest::new("envelope");
            manifest.seed = Some(seed);
            manifest
                .param("stat", stat.name())
                .param("mode", mode_name(mode))
                .param("nsim", nsim)
                .param("rank", rank)
                .param("refit", refit)
                .param("rmax-frac", rmax_frac)
                .param("nr", nr)
                .param("bandwidth", bandwidth_name(bandwidth))
                .param("tol", tol);
            if let Some(s) = grid_spacing {
                manifest.param("grid-spacing", s);
            }
            manifest.input(&data.net)?.input(&data.pattern)?;
            manifest.duration_secs = start.elapsed().as_secs_f64();
            manifest.write(&manifest_path(&out))?;
        }
    }
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    name.push_str(".manifest.json");
    out.with_file_name(name)
}

fn main() {
    if let Ok(threads) = std::env::var("NETFRAK_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are success paths.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            // Flatten the informative part of the message to one line.
            let rendered = e.render().to_string();
            let msg: Vec<&str> = rendered
                .lines()
                .take_while(|l| !l.trim_start().starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("{}", msg.join(" "));
            std::process::exit(1);
        }
    };
    let outcome = std::panic::catch_unwind(|| run(cli));
    match outcome {
        Ok(Ok(())) => {}
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
        Err(_) => {
            eprintln!("internal error: invariant violation");
            std::process::exit(2);
        }
    }
}
