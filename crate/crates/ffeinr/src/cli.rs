//! The `ffeinr` command line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ffeinr_core::train::{evaluate, train_one_stage_with, train_two_stage_with, EvalResult};
use ffeinr_core::viz::{random_seeds, render_error_maps, render_magnitude_map, trace_streamlines};
use ffeinr_core::{downsample, gen_taylor_green, Extents, FlowField, TrainConfig};
use rand::SeedableRng;

use crate::error::{FfError, Result};
use crate::reduction::{compress_to, compression_rate, decompress, Archive};
use crate::{ckpt, config, convert, image, raw};

#[derive(Debug, Parser)]
#[command(name = "ffeinr", about = "Spatio-temporal super-resolution of 2D flow fields", arg_required_else_help = true)]
pub struct Cli {
    /// RNG seed; falls back to FFEINR_SEED.
    #[arg(long, global = true, env = "FFEINR_SEED")]
    pub seed: Option<u64>,
    /// Training config file (`key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output path.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic decaying Taylor-Green vortex.
    GenSynthetic {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 33)]
        frames: usize,
        #[arg(long, default_value_t = 0.1)]
        nu: f64,
    },
    /// Import raw f32 or AmiraMesh data.
    Convert(ConvertArgs),
    /// Strided downsampling.
    Downsample {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        sx: usize,
        #[arg(long)]
        st: usize,
    },
    /// Train a model on a high-res field.
    Train(TrainArgs),
    /// Score a checkpoint against trilinear interpolation as CSV.
    Evaluate {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated `SxT` pairs, e.g. 4x2,2x2.
        #[arg(long, default_value = "4x2")]
        factors: String,
    },
    /// Train and bundle low-res data with the model.
    Compress {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Rebuild a field from an archive.
    Decompress {
        #[arg(long)]
        archive: PathBuf,
        /// `T,H,W`; defaults to the original dims.
        #[arg(long)]
        dims: Option<String>,
    },
    /// Magnitude map of one field, or error maps of several against `--gt`.
    Plot {
        #[arg(long, required = true)]
        data: Vec<PathBuf>,
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        frame: usize,
        #[arg(long, default_value_t = 4)]
        scale: usize,
    },
    /// RK4 streamlines over a magnitude map.
    Streamlines {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0)]
        frame: usize,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        /// Integration step in domain units; defaults to a fifth of a cell.
        #[arg(long)]
        step: Option<f64>,
        #[arg(long, default_value_t = 2000)]
        max_steps: usize,
        #[arg(long, default_value_t = 4)]
        scale: usize,
        /// Also write the polylines as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InputFormat {
    Raw,
    Amira,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long = "in", required = true)]
    input: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "amira")]
    format: InputFormat,
    /// `T,H,W,C` for raw input.
    #[arg(long)]
    dims: Option<String>,
    /// `x_min,x_max,y_min,y_max`; AmiraMesh files carry their own.
    #[arg(long)]
    extents: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
    /// Keep only the leading channels.
    #[arg(long)]
    channels: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Overrides {
    #[arg(long)]
    sx: Option<usize>,
    #[arg(long)]
    st: Option<usize>,
    #[arg(long)]
    iters: Option<u64>,
    #[arg(long)]
    lr: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long)]
    two_stage: bool,
    #[arg(long)]
    stage2_iters: Option<u64>,
}

fn arg_err(msg: impl Into<String>) -> FfError {
    FfError::Core(ffeinr_core::Error::Argument(msg.into()))
}

fn parse_list<T: std::str::FromStr>(s: &str, n: usize, what: &str) -> Result<Vec<T>> {
    let v: Vec<T> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| arg_err(format!("invalid {what} {s:?}"))))
        .collect::<Result<_>>()?;
    if v.len() != n {
        return Err(arg_err(format!("{what} needs {n} comma-separated values, got {s:?}")));
    }
    Ok(v)
}

/// Parses `4x2,2x2` style factor lists.
pub fn parse_factors(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split(',')
        .map(|p| {
            let (a, b) = p.trim().split_once(['x', 'X']).ok_or_else(|| arg_err(format!("bad factor pair {p:?}")))?;
            let f = (a.parse(), b.parse());
            match f {
                (Ok(s), Ok(t)) if s >= 1 && t >= 1 => Ok((s, t)),
                _ => Err(arg_err(format!("bad factor pair {p:?}"))),
            }
        })
        .collect()
}

/// Metrics table with the columns
/// `factor_s,factor_t,method,psnr_db,ssim,rmse_ux,rmse_uy`.
pub fn metrics_csv(results: &[EvalResult]) -> String {
    let mut s = String::from("factor_s,factor_t,method,psnr_db,ssim,rmse_ux,rmse_uy\n");
    for r in results {
        for m in [&r.model, &r.trilinear] {
            let rm = |i: usize| m.rmse.get(i).map_or(String::new(), |v| format!("{v:.6e}"));
            s += &format!(
                "{},{},{},{:.4},{:.6},{},{}\n",
                m.factor.0,
                m.factor.1,
                m.method,
                m.psnr_db,
                m.ssim,
                rm(0),
                rm(1)
            );
        }
    }
    s
}

fn out_path(cli: &Cli) -> Result<&Path> {
    cli.out.as_deref().ok_or_else(|| arg_err("--out is required"))
}

fn load_config(cli: &Cli, o: &Overrides) -> Result<TrainConfig> {
    let mut cfg = match &cli.config {
        Some(p) => config::parse_config(&std::fs::read_to_string(p)?)?,
        None => TrainConfig::default(),
    };
    if let Some(v) = o.sx {
        cfg.sx = v;
    }
    if let Some(v) = o.st {
        cfg.st = v;
    }
    if let Some(v) = o.iters {
        cfg.iters = v;
    }
    if let Some(v) = o.lr {
        cfg.lr = v;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn progress(total: u64) -> impl FnMut(u64, f32) {
    let every = (total / 20).max(1);
    move |it, loss| {
        if it % every == 0 || it == total {
            eprintln!("iter {it}/{total} loss {loss:.6}");
        }
    }
}

fn with_stem(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}_{suffix}.png"))
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.cmd {
        Command::GenSynthetic { n, frames, nu } => raw::save_raw(&gen_taylor_green(*n, *frames, *nu)?, out_path(cli)?),
        Command::Convert(a) => {
            let field = match a.format {
                InputFormat::Raw => {
                    let dims = parse_list::<usize>(a.dims.as_deref().ok_or_else(|| arg_err("--dims is required for raw input"))?, 4, "dims")?;
                    let e = parse_list::<f64>(a.extents.as_deref().unwrap_or("0,1,0,1"), 4, "extents")?;
                    if a.input.len() != 1 {
                        return Err(arg_err("raw input takes exactly one file"));
                    }
                    let f = convert::from_raw_f32(
                        &std::fs::read(&a.input[0])?,
                        [dims[0], dims[1], dims[2], dims[3]],
                        Extents::new(e[0], e[1], e[2], e[3]),
                        a.dt,
                    )?;
                    match a.channels {
                        Some(c) if c < f.channels() => {
                            let vals = f.values().chunks_exact(f.channels()).flat_map(|p| p[..c].to_vec()).collect();
                            FlowField::from_values([dims[0], dims[1], dims[2], c], vals, f.extents(), f.dt())?
                        }
                        _ => f,
                    }
                }
                InputFormat::Amira => {
                    let mut f = convert::from_amira_files(&a.input, a.dt, a.channels)?;
                    if let Some(e) = &a.extents {
                        let e = parse_list::<f64>(e, 4, "extents")?;
                        f = FlowField::new(f.dims(), f.into_values(), Extents::new(e[0], e[1], e[2], e[3]), a.dt, Vec::new())
                            .or_else(|_| Err(arg_err("invalid extents")))?;
                    }
                    f
                }
            };
            writeln!(stdout, "converted {:?}", field.dims())?;
            raw::save_raw(&field, out_path(cli)?)
        }
        Command::Downsample { input, sx, st } => raw::save_raw(&downsample(&raw::load_raw(input)?, *sx, *st)?, out_path(cli)?),
        Command::Train(a) => {
            let out = out_path(cli)?;
            let mut cfg = load_config(cli, &a.overrides)?;
            if a.two_stage {
                cfg.two_stage = true;
            }
            if let Some(v) = a.stage2_iters {
                cfg.stage2_iters = v;
            }
            let high = raw::load_raw(&a.data)?;
            cfg.model.channels = high.channels();
            let low = downsample(&high, cfg.sx, cfg.st)?;
            let mut cb = progress(cfg.iters + if cfg.two_stage { cfg.stage2_iters } else { 0 });
            let ck = if cfg.two_stage {
                train_two_stage_with(&low, &high, &cfg, &mut cb)?
            } else {
                train_one_stage_with(&low, &high, &cfg, &mut cb)?
            };
            ckpt::save_checkpoint(&ck, out)?;
            writeln!(stdout, "checkpoint written to {} after {} iterations", out.display(), ck.iteration)?;
            Ok(())
        }
        Command::Evaluate { ckpt: cp, data, factors } => {
            let ck = ckpt::load_checkpoint(cp)?;
            let high = raw::load_raw(data)?;
            let csv = metrics_csv(&evaluate(&ck, &high, &parse_factors(factors)?)?);
            match &cli.out {
                Some(p) => std::fs::write(p, &csv)?,
                None => stdout.write_all(csv.as_bytes())?,
            }
            Ok(())
        }
        Command::Compress { data, overrides } => {
            let out = out_path(cli)?;
            let high = raw::load_raw(data)?;
            let mut cfg = load_config(cli, overrides)?;
            cfg.model.channels = high.channels();
            let a = compress_to(&high, &cfg, out, &mut progress(cfg.iters))?;
            let r = compression_rate(&a, &high)?;
            writeln!(
                stdout,
                "ratio {:.3} = {} / {} bytes (header {}, low-res {}, model {}, meta {})",
                r.ratio, r.original_bytes, r.archive_bytes, r.header_bytes, r.lowres_bytes, r.model_bytes, r.meta_bytes
            )?;
            Ok(())
        }
        Command::Decompress { archive, dims } => {
            let a = Archive::load(archive)?;
            let d = match dims {
                Some(s) => {
                    let v = parse_list::<usize>(s, 3, "dims")?;
                    (v[0], v[1], v[2])
                }
                None => (a.meta.original_dims[0], a.meta.original_dims[1], a.meta.original_dims[2]),
            };
            raw::save_raw(&decompress(&a, d)?, out_path(cli)?)
        }
        Command::Plot { data, gt, frame, scale } => {
            let out = out_path(cli)?;
            let fields = data.iter().map(raw::load_raw).collect::<Result<Vec<_>>>()?;
            match gt {
                None => {
                    if fields.len() != 1 {
                        return Err(arg_err("magnitude plots take one --data; pass --gt for error maps"));
                    }
                    image::save_png(&image::upscale(&render_magnitude_map(&fields[0], *frame)?, *scale), out)
                }
                Some(g) => {
                    let g = raw::load_raw(g)?;
                    let panels: Vec<_> = fields.iter().map(|f| (f, &g)).collect();
                    for (i, img) in render_error_maps(&panels, *frame)?.iter().enumerate() {
                        let p = with_stem(out, &format!("err{i}"));
                        image::save_png(&image::upscale(img, *scale), &p)?;
                        writeln!(stdout, "{} max error {:.6e}", p.display(), img.max)?;
                    }
                    Ok(())
                }
            }
        }
        Command::Streamlines { data, frame, seeds, step, max_steps, scale, csv } => {
            let out = out_path(cli)?;
            let f = raw::load_raw(data)?;
            let e = f.extents();
            let step = step.unwrap_or(0.2 * e.width() / (f.width() - 1) as f64);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cli.seed.unwrap_or(0));
            let lines = trace_streamlines(&f, *frame, &random_seeds(e, *seeds, &mut rng), step, *max_steps)?;
            let mut img = image::upscale(&render_magnitude_map(&f, *frame)?, *scale);
            image::draw_streamlines(&mut img, e, &lines, [255, 255, 255]);
            image::save_png(&img, out)?;
            if let Some(p) = csv {
                let mut s = String::from("line,x,y\n");
                for (i, l) in lines.iter().enumerate() {
                    for q in &l.points {
                        s += &format!("{i},{:?},{:?}\n", q[0], q[1]);
                    }
                }
                std::fs::write(p, s)?;
            }
            Ok(())
        }
    }
}

/// Runs the CLI and returns the process exit code: 0 on success, 2 for
/// usage or argument errors, 1 for runtime failures.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                let _ = write!(stdout, "{}", e.render());
                return 0;
            }
            let _ = write!(stderr, "{}", e.render());
            return 2;
        }
    };
    match dispatch(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_argument() {
                2
            } else {
                1
            }
        }
    }
}
