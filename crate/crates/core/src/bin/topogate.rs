use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use topogate::circuit::{compilation_deviation, compile, simulate, Backend, Circuit, CircuitError, CompiledProgram};
use topogate::gates::{euler_zyz, Unitary};
use topogate::geometry::{solid_angle, winding_number, ClosedPath2, ClosedPath3, GeometryError, Vec2, Vec3};
use topogate::lattice::{LatticeError, LatticeRegister, PhaseRule};
use topogate::monopole::{monopole_phase, MonopoleConfig, MonopoleError};
use topogate::spinline::{Architecture, SpinScales};
use topogate::state::StateVector;

const EXIT_MISMATCH: u8 = 1;
const EXIT_MALFORMED: u8 = 2;
const EXIT_DIMENSION: u8 = 3;
const EXIT_UNSUPPORTED: u8 = 4;
const EXIT_INCOMMENSURATE: u8 = 5;
const EXIT_ON_PATH: u8 = 6;
const EXIT_LAYOUT: u8 = 7;

#[derive(Parser)]
#[command(name = "topogate", version, about = "Topological gate simulator and compiler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Lattice,
    Spin,
}

#[derive(Clone, Copy, ValueEnum)]
enum ArchArg {
    Flying,
    Static,
}

#[derive(Subcommand)]
enum Command {
    /// Run a circuit on a basis state and print the amplitudes.
    Simulate {
        circuit: PathBuf,
        /// Initial basis state as a bitstring q_{n-1}...q_0 (default all zeros).
        #[arg(long)]
        initial: Option<String>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Compile a circuit for a backend and report each gate's tag.
    Compile {
        circuit: PathBuf,
        #[arg(long, value_enum)]
        backend: BackendArg,
        /// Lattice phase unit φ0 in radians.
        #[arg(long, default_value_t = FRAC_PI_2, allow_negative_numbers = true)]
        phi0: f64,
        /// Largest |n| tried when matching an angle to n·φ0.
        #[arg(long, default_value_t = 10)]
        n_max: u32,
        /// Use the anyon phase rule (all pairs couple) instead of charge/dipole.
        #[arg(long)]
        anyon: bool,
        /// Lattice register file; overrides the default layout and --phi0/--anyon.
        #[arg(long)]
        register: Option<PathBuf>,
        /// Spin-orbit coupling constant.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        kappa: f64,
        #[arg(long, value_enum, default_value = "flying")]
        arch: ArchArg,
        /// Program output file; the report then goes to stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Check a compiled program against its circuit, up to global phase.
    Verify {
        circuit: PathBuf,
        program: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Print the ZYZ Euler angles of a 2x2 unitary.
    Decompose { unitary: PathBuf },
    /// Winding number of a planar path about a point.
    Winding {
        path: PathBuf,
        #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
        point: Vec2,
    },
    /// Signed solid angle of a 3D path seen from an apex.
    SolidAngle {
        path: PathBuf,
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        apex: Vec3,
    },
    /// Phase picked up by a charge carried around a path near a monopole.
    MonopolePhase {
        path: PathBuf,
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        monopole: Vec3,
        #[arg(long, default_value_t = 1)]
        n_q: i64,
    },
}

fn parse_coords<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {s:?}"));
    }
    let mut out = [0.0f64; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|e| format!("{p:?}: {e}"))?;
        if !o.is_finite() {
            return Err(format!("{p:?} is not finite"));
        }
    }
    Ok(out)
}

fn parse_vec2(s: &str) -> Result<Vec2, String> {
    parse_coords::<2>(s).map(|[x, y]| Vec2::new(x, y))
}

fn parse_vec3(s: &str) -> Result<Vec3, String> {
    parse_coords::<3>(s).map(|[x, y, z]| Vec3::new(x, y, z))
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

fn geometry_code(e: &GeometryError) -> u8 {
    match e {
        GeometryError::PointOnPath { .. } | GeometryError::ApexOnPath { .. } => EXIT_ON_PATH,
        _ => EXIT_MALFORMED,
    }
}

fn lattice_code(e: &LatticeError) -> u8 {
    match e {
        LatticeError::DimensionMismatch { .. } | LatticeError::InvalidQubit { .. } | LatticeError::TooLarge(_) => {
            EXIT_DIMENSION
        }
        LatticeError::Uncoupled { .. } => EXIT_UNSUPPORTED,
        LatticeError::IncommensuratePhase { .. } => EXIT_INCOMMENSURATE,
        LatticeError::LayoutInfeasible { .. } => EXIT_LAYOUT,
        LatticeError::Geometry(g) => geometry_code(g),
        _ => EXIT_MALFORMED,
    }
}

impl From<CircuitError> for Failure {
    fn from(e: CircuitError) -> Self {
        let code = match &e {
            CircuitError::DimensionMismatch { .. } | CircuitError::TooLarge(_) | CircuitError::State(_) => {
                EXIT_DIMENSION
            }
            CircuitError::UnsupportedGate { .. } => EXIT_UNSUPPORTED,
            CircuitError::IncommensuratePhase { .. } => EXIT_INCOMMENSURATE,
            CircuitError::Lattice { source, .. } | CircuitError::LatticeProgram(source) => lattice_code(source),
            _ => EXIT_MALFORMED,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        Failure::new(geometry_code(&e), e.to_string())
    }
}

impl From<MonopoleError> for Failure {
    fn from(e: MonopoleError) -> Self {
        match e {
            MonopoleError::Geometry(g) => g.into(),
            other => Failure::new(EXIT_MALFORMED, other.to_string()),
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::new(EXIT_MALFORMED, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::new(EXIT_MALFORMED, format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::new(EXIT_MALFORMED, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros dropped.
fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{}", if x == 0.0 { 0.0 } else { x });
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp).max(0) as usize, x);
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let m = if mantissa.contains('.') { mantissa.trim_end_matches('0').trim_end_matches('.') } else { mantissa };
        format!("{m}e{exp}")
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Simulate { circuit, initial, output } => {
            let c: Circuit = read_json(&circuit)?;
            let init = match initial {
                Some(label) => {
                    let s = StateVector::from_label(&label).map_err(|e| Failure::new(EXIT_MALFORMED, e.to_string()))?;
                    if s.n_qubits() != c.n_qubits() {
                        return Err(Failure::new(
                            EXIT_DIMENSION,
                            format!("initial state has {} qubits, circuit has {}", s.n_qubits(), c.n_qubits()),
                        ));
                    }
                    s
                }
                None => StateVector::basis(c.n_qubits(), 0),
            };
            let out = simulate(&c, &init)?;
            emit(&to_json(&out), output.as_deref())?;
        }
        Command::Compile { circuit, backend, phi0, n_max, anyon, register, kappa, arch, output } => {
            let c: Circuit = read_json(&circuit)?;
            let backend = match backend {
                BackendArg::Lattice => {
                    let register = match register {
                        Some(p) => read_json::<LatticeRegister>(&p)?,
                        None => {
                            if !phi0.is_finite() {
                                return Err(Failure::new(EXIT_MALFORMED, "--phi0 must be finite"));
                            }
                            let rule = if anyon { PhaseRule::anyon(phi0) } else { PhaseRule::charge_dipole(phi0) };
                            LatticeRegister::default_layout(c.n_qubits(), rule)
                                .map_err(|e| Failure::new(lattice_code(&e), e.to_string()))?
                        }
                    };
                    Backend::Lattice { register, n_max }
                }
                BackendArg::Spin => {
                    let arch = match arch {
                        ArchArg::Flying => Architecture::Flying,
                        ArchArg::Static => Architecture::Static,
                    };
                    Backend::Spin { kappa, arch, scales: SpinScales::default() }
                }
            };
            let (program, report) = compile(&c, &backend)?;
            let text = to_json(&program);
            match output {
                Some(p) => {
                    emit(&text, Some(&p))?;
                    print!("{report}");
                }
                None => {
                    print!("{text}");
                    eprint!("{report}");
                }
            }
        }
        Command::Verify { circuit, program, tol } => {
            if !(tol > 0.0) {
                return Err(Failure::new(EXIT_MALFORMED, "--tol must be positive"));
            }
            let c: Circuit = read_json(&circuit)?;
            let p: CompiledProgram = read_json(&program)?;
            let dev = compilation_deviation(&c, &p)?;
            println!("max deviation: {dev:e}");
            if dev > tol {
                println!("FAIL (tol {tol:e})");
                return Ok(ExitCode::from(EXIT_MISMATCH));
            }
            println!("PASS (tol {tol:e})");
        }
        Command::Decompose { unitary } => {
            let u: Unitary = read_json(&unitary)?;
            if u.dim() != 2 {
                return Err(Failure::new(EXIT_DIMENSION, format!("expected a 2x2 unitary, got {0}x{0}", u.dim())));
            }
            print!("{}", to_json(&euler_zyz(&u)));
        }
        Command::Winding { path, point } => {
            let p: ClosedPath2 = read_json(&path)?;
            println!("{}", winding_number(&p, point)?.value());
        }
        Command::SolidAngle { path, apex } => {
            let p: ClosedPath3 = read_json(&path)?;
            println!("{}", sig12(solid_angle(&p, apex)?));
        }
        Command::MonopolePhase { path, monopole, n_q } => {
            let p: ClosedPath3 = read_json(&path)?;
            let cfg = MonopoleConfig::new(monopole, n_q)?;
            println!("{}", sig12(monopole_phase(&p, &cfg)?));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
