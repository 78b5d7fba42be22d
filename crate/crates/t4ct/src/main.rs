//! Command-line front end: validation, transversal structures, orientations,
//! the balanced lattice, mobiles, the codec and the counting pipeline.

use std::fmt::Write as _;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use t4ct::angle::{AngleMap, FourOrientation};
use t4ct::census::census;
use t4ct::codec::{decode, encode, CodeWord};
use t4ct::lattice::{check_lattice, enumerate_balanced, hasse_diagram, minimize};
use t4ct::map::{DartId, ToroidalMap};
use t4ct::mobile::{complete_closure, extract_mobile, Mobile};
use t4ct::series::count_table;
use t4ct::transversal::{find_balanced_ts, ts_to_orientation, TransversalStructure};

#[derive(Parser)]
#[command(name = "t4ct", version, about = "Transversal structures on essentially 4-connected toroidal triangulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Cover window radius used by connectivity and disk checks.
    #[arg(long, global = true, default_value_t = 3)]
    cover_radius: i64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct InputArg {
    /// Input file; `-` or absent reads standard input.
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a TMAP file and report essential 4-connectivity diagnostics.
    Check(InputArg),
    /// Compute a balanced transversal structure (TMAP + ts lines).
    Ts(InputArg),
    /// Derive the 4-orientation of a transversal structure (TMAP + orient lines).
    Orient {
        #[command(flatten)]
        input: InputArg,
        /// Descend to the minimal balanced orientation for the root half-edge.
        #[arg(long)]
        minimize: bool,
        /// Root half-edge (overrides a `root` line in the file).
        #[arg(long)]
        root: Option<DartId>,
    },
    /// Hasse diagram of the balanced lattice (guarded instance size).
    Lattice {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        root: Option<DartId>,
        /// Enumeration guard on the vertex count.
        #[arg(long, default_value_t = 4)]
        max_n: usize,
    },
    /// Extract the extended mobile of the minimal balanced orientation.
    Mobile {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        root: Option<DartId>,
    },
    /// Rebuild the triangulation from a mobile file by complete closure.
    Rebuild(InputArg),
    /// Encode a rooted triangulation into a T4CT code word file.
    Encode {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        root: Option<DartId>,
        /// Output file; standard output if absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decode a T4CT code word file back to a rooted TMAP.
    Decode {
        #[command(flatten)]
        input: InputArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the exact counting table up to an order.
    Count {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Exhaustive census of essentially 4-connected triangulations (n <= 2).
    Census {
        #[arg(long)]
        n: usize,
        /// Worker threads for the rotation-system sweep.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn read_input(path: &Option<PathBuf>) -> std::io::Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p),
        _ => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf)?;
            Ok(buf)
        }
    }
}

fn write_output(path: &Option<PathBuf>, content: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Splits a combined file into the TMAP core and the decoration lines.
fn split_sections(text: &str) -> (String, String) {
    let mut tmap = String::new();
    let mut extra = String::new();
    for line in text.lines() {
        let stripped = line.split('#').next().unwrap_or("").trim();
        let head = stripped.split_whitespace().next().unwrap_or("");
        match head {
            "ts" | "orient" | "label" => {
                extra.push_str(line);
                extra.push('\n');
            }
            _ => {
                tmap.push_str(line);
                tmap.push('\n');
            }
        }
    }
    (tmap, extra)
}

fn resolve_root(map: &ToroidalMap, flag: Option<DartId>) -> Result<DartId, String> {
    flag.or(map.root()).ok_or_else(|| {
        "a root half-edge is required: pass --root or add a `root` line".to_string()
    })
}

fn run() -> Result<(), (u8, String)> {
    let cli = Cli::parse();
    let window = cli.cover_radius;
    let domain = |e: t4ct::Error| (1u8, e.to_string());
    let io_err = |e: std::io::Error| (1u8, format!("io error: {e}"));
    match cli.command {
        Command::Check(input) => {
            let text = read_input(&input.input).map_err(io_err)?;
            let (tmap, _) = split_sections(&text);
            let map = ToroidalMap::parse_tmap(&tmap).map_err(domain)?;
            println!(
                "vertices {}  edges {}  faces {}  triangulation {}",
                map.n_vertices(),
                map.n_edges(),
                map.n_faces(),
                map.is_triangulation()
            );
            let report = map.essential_connectivity(window).map_err(domain)?;
            for e in &report.contractible_loops {
                println!("contractible loop at edge {e}");
            }
            for (a, b) in &report.homotopic_pairs {
                println!("homotopic multiple edges {a} {b}");
            }
            for t in &report.separating_triangles {
                println!("separating triangle {t:?}");
            }
            if report.ok() {
                println!("essentially 4-connected: yes");
                Ok(())
            } else {
                println!("essentially 4-connected: no");
                Err((1, "the triangulation is not essentially 4-connected".into()))
            }
        }
        Command::Ts(input) => {
            let text = read_input(&input.input).map_err(io_err)?;
            let (tmap, _) = split_sections(&text);
            let map = ToroidalMap::parse_tmap(&tmap).map_err(domain)?;
            let ts = find_balanced_ts(&map, window).map_err(domain)?;
            print!("{}{}", map.write_tmap(), ts.serialize(&map));
            Ok(())
        }
        Command::Orient {
            input,
            minimize: do_min,
            root,
        } => {
            let text = read_input(&input.input).map_err(io_err)?;
            let (tmap, extra) = split_sections(&text);
            let mut map = ToroidalMap::parse_tmap(&tmap).map_err(domain)?;
            let a = AngleMap::new(&map).map_err(domain)?;
            let ts = if extra.contains("ts ") {
                TransversalStructure::parse(&map, &extra).map_err(domain)?
            } else {
                find_balanced_ts(&map, window).map_err(domain)?
            };
            let mut orientation = ts_to_orientation(&a, &ts).map_err(domain)?;
            if do_min {
                let h0 = resolve_root(&map, root).map_err(|m| (2, m))?;
                map.set_root(Some(h0));
                let basis = map.homology_basis();
                let root_face = a.face_of_g_edge(h0);
                orientation = minimize(&a, &basis, &orientation, root_face)
                    .map_err(domain)?
                    .result;
            } else if let Some(r) = root {
                map.set_root(Some(r));
            }
            print!("{}{}", map.write_tmap(), orientation.serialize(&a));
            Ok(())
        }
        Command::Lattice { input, root, max_n } => {
            let text = read_input(&input.input).map_err(io_err)?;
            let (tmap, _) = split_sections(&text);
            let map = ToroidalMap::parse_tmap(&tmap).map_err(domain)?;
            let h0 = resolve_root(&map, root).map_err(|m| (2, m))?;
            let a = AngleMap::new(&map).map_err(domain)?;
            let basis = map.homology_basis();
            let states = enumerate_balanced(&a, &basis, max_n).map_err(domain)?;
            let root_face = a.face_of_g_edge(h0);
            let digest = |o: &FourOrientation| {
                let mut hasher = Sha256::new();
                hasher.update(o.serialize(&a).as_bytes());
                let out = hasher.finalize();
                out.iter().take(6).fold(String::new(), |mut s, b| {
                    let _ = write!(s, "{b:02x}");
                    s
                })
            };
            println!("states {}", states.len());
            let check = check_lattice(&a, root_face, &states).map_err(domain)?;
            println!("minimum {}", digest(&states[check.min]));
            println!("maximum {}", digest(&states[check.max]));
            for (i, j) in hasse_diagram(&a, root_face, &states) {
                println!("edge {} {}", digest(&states[i]), digest(&states[j]));
            }
            Ok(())
        }
        Command::Mobile { input, root } => {
            let text = read_input(&input.input).map_err(io_err)?;
            let (tmap, extra) = split_sections(&text);
            let map = ToroidalMap::parse_tmap(&tmap).map_err(domain)?;
            let h0 = resolve_root(&map, root).map_err(|m| (2, m))?;
            let a = AngleMap::new(&map).map_err(domain)?;
            let orientation = if extra.contains("orient ") {
                FourOrientation::parse(&a, &extra).map_err(domain)?
            } else {
                let ts = find_balanced_ts(&map, window).map_err(domain)?;
                let o = ts_to_orientation(&a, &ts).map_err(domain)?;
                let basis = map.homology_basis();
                minimize(&a, &basis, &o, a.face_of_g_edge(h0))
                    .map_err(domain)?
                    .result
            };
            let ex = extract_mobile(&map, &orientation, h0).map_err(domain)?;
            print!("{}", ex.mobile.serialize());
            Ok(())
        }
        Command::Rebuild(input) => {
            let text = read_input(&input.input).map_err(io_err)?;
            let mobile = Mobile::parse(&text).map_err(domain)?;
            let closed = complete_closure(&mobile).map_err(domain)?;
            print!("{}", closed.map.write_tmap());
            Ok(())
        }
        Command::Encode { input, root, output } => {
            let text = read_input(&input.input).map_err(io_err)?;
            let (tmap, _) = split_sections(&text);
            let map = ToroidalMap::parse_tmap(&tmap).map_err(domain)?;
            let h0 = resolve_root(&map, root).map_err(|m| (2, m))?;
            let code = encode(&map, h0, window).map_err(domain)?;
            write_output(&output, &code.to_file()).map_err(io_err)?;
            Ok(())
        }
        Command::Decode { input, output } => {
            let text = read_input(&input.input).map_err(io_err)?;
            let code = CodeWord::from_file(&text).map_err(domain)?;
            let (map, _) = decode(&code, window).map_err(domain)?;
            write_output(&output, &map.write_tmap()).map_err(io_err)?;
            Ok(())
        }
        Command::Count { n, format } => {
            let table = count_table(n).map_err(domain)?;
            match format {
                Format::Text => {
                    println!(
                        "{:>3} {:>14} {:>14} {:>12} {:>14} {:>14} {:>16} {:>16}",
                        "n", "ternary", "planar", "sq-skel", "hex-skel", "skeleton", "toroidal", "total"
                    );
                    for i in 0..=n {
                        println!(
                            "{:>3} {:>14} {:>14} {:>12} {:>14} {:>14} {:>16} {:>16}",
                            i,
                            table.ternary[i],
                            table.planar[i],
                            table.square_skeleton[i],
                            table.hexagon_skeleton[i],
                            table.skeleton[i],
                            table.toroidal[i],
                            table.total[i]
                        );
                    }
                }
                Format::Json => {
                    let arr = |v: &Vec<num_bigint::BigInt>| {
                        let items: Vec<String> = v.iter().map(|x| format!("\"{x}\"")).collect();
                        format!("[{}]", items.join(","))
                    };
                    println!(
                        "{{\"order\":{},\"ternary\":{},\"planar\":{},\"square_skeleton\":{},\"hexagon_skeleton\":{},\"skeleton\":{},\"toroidal\":{},\"total\":{}}}",
                        n,
                        arr(&table.ternary),
                        arr(&table.planar),
                        arr(&table.square_skeleton),
                        arr(&table.hexagon_skeleton),
                        arr(&table.skeleton),
                        arr(&table.toroidal),
                        arr(&table.total)
                    );
                }
            }
            Ok(())
        }
        Command::Census { n, jobs, format } => {
            let result = census(n, window, jobs.max(1)).map_err(domain)?;
            match format {
                Format::Text => {
                    println!("n {}  rooted {}  maps {}", result.n, result.rooted, result.maps);
                }
                Format::Json => {
                    println!(
                        "{{\"n\":{},\"rooted\":{},\"maps\":{}}}",
                        result.n, result.rooted, result.maps
                    );
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
