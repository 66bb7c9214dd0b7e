use measq::classical::{self, Closure, InitialDistribution, MomentVector, Statistics};
use measq::collision::{self, CatState, CollisionInput, GaussianLabel};
use measq::ctap::{self, ChainSpec, PulseSchedule, TransportInput};
use measq::gas::GasModel;
use measq::measurement;
use measq::qbm::{self, MomentSettings};
use measq::qpc::{self, Kernel, QpcArray};
use measq::tls::{self, TlsBath};
use measq::wigner::{self, DecoherenceMc};
use measq::PositionGrid;
use rand::RngCore;
use rayon::prelude::*;

use crate::config::{param, Kind, Param, RunConfig};
use crate::output::{num, Report, Table};
use crate::CliError;

pub struct Command {
    pub name: &'static str,
    pub about: &'static str,
    pub params: &'static [Param],
    pub run: fn(&RunConfig) -> Result<Report, CliError>,
}

const PULSES: Kind = Kind::Choice(&["demonstration", "counterintuitive"]);
const CLOSURE: Kind = Kind::Choice(&["gaussian", "kramers"]);

macro_rules! gas_params {
    ($n_g:expr, $t:expr, $m_g:expr, $w_g:expr, $delta:expr) => {
        [
            param("n_g", Kind::Real, $n_g, "gas number density"),
            param("temperature", Kind::Real, $t, "gas temperature"),
            param("m_g", Kind::Real, $m_g, "gas particle mass"),
            param("w_g", Kind::Real, $w_g, "gas wave-packet width"),
            param("delta", Kind::Real, $delta, "coarse-graining time"),
            param("m", Kind::Real, "1", "Brownian particle mass"),
        ]
    };
}

macro_rules! concat_params {
    ($($part:expr),* $(,)?) => {{
        const PARTS: &[&[Param]] = &[$(&$part),*];
        const LEN: usize = { let mut n = 0; let mut i = 0; while i < PARTS.len() { n += PARTS[i].len(); i += 1; } n };
        const OUT: [Param; LEN] = {
            let mut out = [PARTS[0][0]; LEN];
            let (mut k, mut i) = (0, 0);
            while i < PARTS.len() {
                let mut j = 0;
                while j < PARTS[i].len() {
                    out[k] = PARTS[i][j];
                    k += 1;
                    j += 1;
                }
                i += 1;
            }
            out
        };
        &OUT
    }};
}

const INITIAL: [Param; 4] = [
    param("x_mean", Kind::Real, "0", "initial mean position"),
    param("x_sd", Kind::Real, "1", "initial position spread"),
    param("p_mean", Kind::Real, "3", "initial mean momentum"),
    param("p_sd", Kind::Real, "0.5", "initial momentum spread"),
];

pub const COMMANDS: &[Command] = &[
    Command {
        name: "ctap-run",
        about: "Closed-system transport along a dot chain; one row per recorded time",
        params: &[
            param("n_dots", Kind::Int, "5", "number of dots (odd, >= 3)"),
            param("omega_max", Kind::Real, "1", "peak tunnel coupling"),
            param("period", Kind::Real, "60", "pulse duration T"),
            param("pulses", PULSES, "demonstration", "pulse family"),
            param("dt", Kind::Real, "0.01", "RK4 step (dt*omega_max <= 0.05)"),
            param("record_every", Kind::Int, "10", "keep every k-th step"),
            param("input_site", Kind::Int, "1", "initially occupied site (1-based)"),
            param("window_start", Kind::Int, "0", "first transport site; 0 uses the whole chain"),
            param("window_end", Kind::Int, "0", "last transport site; 0 uses the whole chain"),
        ],
        run: ctap_run,
    },
    Command {
        name: "ctap-sweep",
        about: "Transport fidelity against pulse duration with a step-halving error estimate",
        params: &[
            param("n_dots", Kind::Int, "5", "number of dots (odd, >= 3)"),
            param("omega_max", Kind::Real, "1", "peak tunnel coupling"),
            param("periods", Kind::Reals, "20,40,60,80,120", "pulse durations"),
            param("pulses", PULSES, "demonstration", "pulse family"),
            param("dt", Kind::Real, "0.01", "coarse RK4 step; the fine run uses dt/2"),
            param("input_site", Kind::Int, "1", "initially occupied site (1-based)"),
            param("adiabatic_samples", Kind::Int, "201", "times scanned for the adiabaticity maximum"),
        ],
        run: ctap_sweep,
    },
    Command {
        name: "qpc-loss",
        about: "Transfer loss from point-contact dephasing for several chain lengths",
        params: &[
            param("kernel", Kind::Choice(&["local", "distance"]), "local", "measurement kernel"),
            param("alpha", Kind::Real, "0.04", "measurement strength"),
            param("a", Kind::Real, "1", "distance kernel range"),
            param("d", Kind::Real, "1", "dot spacing"),
            param("rate", Kind::Real, "1", "measurement rate per point contact"),
            param("site_cutoff", Kind::Int, "10000", "rail truncation"),
            param("n_dots", Kind::Ints, "3,11", "chain lengths"),
            param("periods", Kind::Reals, "150,249", "pulse duration per chain length (one entry is shared)"),
            param("omega_max", Kind::Real, "1", "peak tunnel coupling"),
            param("pulses", PULSES, "counterintuitive", "pulse family"),
            param("cross_check", Kind::Bool, "false", "also integrate the full Lindblad equation"),
            param("dt", Kind::Real, "0.02", "Lindblad RK4 step"),
        ],
        run: qpc_loss,
    },
    Command {
        name: "tls-run",
        about: "Transport with static two-level fluctuators; one row per recorded time",
        params: &[
            param("n_dots", Kind::Int, "5", "number of dots (odd, >= 3)"),
            param("omega_max", Kind::Real, "1", "peak tunnel coupling"),
            param("period", Kind::Real, "150", "pulse duration T"),
            param("pulses", PULSES, "counterintuitive", "pulse family"),
            param("chi", Kind::Reals, "0.15", "fluctuator coupling per dot (one entry is shared)"),
            param("omega", Kind::Reals, "-1,1,1,1,1", "fluctuator polarization per dot in [-1, 1]"),
            param("dt", Kind::Real, "0.01", "RK4 step"),
            param("record_every", Kind::Int, "50", "keep every k-th step"),
            param("input_site", Kind::Int, "1", "initially occupied site (1-based)"),
            param("memory_budget", Kind::Int, "1073741824", "bytes allowed for stored block states"),
            param("oscillation_window", Kind::Int, "4", "samples per window of the oscillation metric"),
            param("crossing_samples", Kind::Int, "201", "times scanned for the level-crossing condition"),
        ],
        run: tls_run,
    },
    Command {
        name: "classical-mc",
        about: "Classical collision Monte Carlo against the moment equations",
        params: concat_params!(
            gas_params!("1", "1", "0.01", "1", "0.1"),
            INITIAL,
            [
                param("t_end_gamma", Kind::Real, "3", "final time in units of 1/gamma"),
                param("n_times", Kind::Int, "6", "output times"),
                param("trajectories", Kind::Int, "20000", "Monte Carlo trajectories"),
                param("seed", Kind::Seed, "1", "random seed"),
                param("statistics", Kind::Choice(&["flux", "thermal"]), "flux", "gas momentum statistics"),
                param("closure", CLOSURE, "gaussian", "closure of the comparison moment equations"),
                param("dt_gamma", Kind::Real, "0.01", "moment-equation step in units of 1/gamma"),
            ],
        ),
        run: classical_mc,
    },
    Command {
        name: "collide",
        about: "Single wave-packet collision: outgoing labels and an in-collision density",
        params: &[
            param("x", Kind::Real, "10", "Brownian packet position"),
            param("p", Kind::Real, "-2", "Brownian packet momentum"),
            param("w", Kind::Real, "4", "Brownian packet width"),
            param("m", Kind::Real, "1", "Brownian mass"),
            param("x_g", Kind::Real, "-33.3", "gas packet position"),
            param("p_g", Kind::Real, "2", "gas packet momentum"),
            param("alpha", Kind::Real, "0.3", "mass ratio m_g/m; the gas width is w/sqrt(alpha)"),
            param("t", Kind::Real, "5", "evaluation time"),
            param("observable", Kind::Choice(&["position", "momentum"]), "position", "density written to the CSV"),
            param("x_min", Kind::Real, "-30", "position grid start"),
            param("x_max", Kind::Real, "30", "position grid end"),
            param("n_x", Kind::Int, "601", "position grid points"),
            param("p_min", Kind::Real, "-5", "momentum grid start"),
            param("p_max", Kind::Real, "5", "momentum grid end"),
            param("n_p", Kind::Int, "201", "momentum grid points"),
        ],
        run: collide,
    },
    Command {
        name: "qbm-moments",
        about: "First and second moments under the collisional master equation",
        params: concat_params!(
            gas_params!("1", "1", "0.01", "1", "0.1"),
            INITIAL,
            [
                param("closure", CLOSURE, "gaussian", "collision-term closure"),
                param("delta_term", Kind::Bool, "false", "keep the position-diffusion term"),
                param("t_end_gamma", Kind::Real, "5", "final time in units of 1/gamma"),
                param("n_times", Kind::Int, "50", "output times"),
                param("dt_gamma", Kind::Real, "0.01", "RK4 step in units of 1/gamma"),
            ],
        ),
        run: qbm_moments,
    },
    Command {
        name: "wigner-sweep",
        about: "Interference loss of a cat state per thermal collision against temperature",
        params: &[
            param("cat", Kind::Choice(&["position", "momentum"]), "position", "separation direction"),
            param("x_sep", Kind::Real, "40", "position separation of a position cat"),
            param("p_sep", Kind::Real, "2.4", "momentum separation of a momentum cat"),
            param("w", Kind::Real, "4", "packet width"),
            param("m", Kind::Real, "1", "Brownian mass"),
            param("alpha", Kind::Real, "1e-4", "mass ratio m_g/m"),
            param("temperatures", Kind::Reals, "0.1,0.2,0.5,1", "gas temperatures"),
            param("t_window", Kind::Real, "20", "collision window (0, t)"),
            param("samples", Kind::Int, "200", "Monte Carlo collisions per temperature (>= 100)"),
            param("seed", Kind::Seed, "1", "random seed"),
        ],
        run: wigner_sweep,
    },
    Command {
        name: "validity",
        about: "Checks the inequalities bounding the collisional description",
        params: &gas_params!("10", "1", "1", "10", "10"),
        run: validity,
    },
];

fn chain_and_schedule(c: &RunConfig, period: f64) -> Result<(ChainSpec, PulseSchedule), CliError> {
    let (n, omax) = (c.int("n_dots"), c.real("omega_max"));
    let window = if c.values.contains_key("window_start") { (c.int("window_start"), c.int("window_end")) } else { (0, 0) };
    let chain = match window {
        (0, 0) => ChainSpec::new(n, omax)?,
        (m, e) => ChainSpec::with_window(n, omax, m, e)?,
    };
    let s = match c.choice("pulses") {
        "demonstration" => PulseSchedule::demonstration(period, omax)?,
        _ => PulseSchedule::counterintuitive(period, omax)?,
    };
    Ok((chain, s))
}

fn site_columns(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |k| format!("{prefix}_{k}"))
}

fn ctap_run(c: &RunConfig) -> Result<Report, CliError> {
    let (chain, s) = chain_and_schedule(c, c.real("period"))?;
    let run = ctap::run_transport(&chain, &s, &TransportInput::Site(c.int("input_site")), c.real("dt"), None, c.int("record_every"))?;
    let n = chain.n_dots();
    let mut r = Report { table: Table::new(["t", "omega_p", "omega_s"].map(String::from).into_iter().chain(site_columns("pop", n)).chain(["fidelity".into()])), ..Default::default() };
    for (t, psi) in run.trajectory.times.iter().zip(&run.trajectory.states) {
        let pops = psi.populations();
        let mut row = vec![*t, s.omega_p(*t), s.omega_s(*t)];
        row.extend(&pops);
        row.push(pops[chain.end() - 1]);
        r.table.push_reals(&row);
    }
    r.put("final_fidelity", run.fidelity);
    r.put("coherent_fidelity", run.coherent_fidelity);
    r.put("dynamical_phase", run.dynamical_phase);
    r.put("max_hermiticity_defect", run.trajectory.stats.max_hermiticity_defect);
    r.text = format!("final fidelity {}\n", num(run.fidelity));
    Ok(r)
}

fn max_adiabaticity(chain: &ChainSpec, s: &PulseSchedule, samples: usize) -> Result<f64, CliError> {
    let mut worst = 0.0f64;
    for t in s.sample_times(samples) {
        worst = worst.max(ctap::adiabaticity_metric(chain, s, t, None)?.max);
    }
    Ok(worst)
}

fn ctap_sweep(c: &RunConfig) -> Result<Report, CliError> {
    let input = TransportInput::Site(c.int("input_site"));
    let rows = c
        .reals("periods")
        .par_iter()
        .map(|&period| {
            let (chain, s) = chain_and_schedule(c, period)?;
            let conv = ctap::transport_convergence(&chain, &s, &input, c.real("dt"), None)?;
            Ok(vec![period, conv.fine, conv.error_estimate, max_adiabaticity(&chain, &s, c.int("adiabatic_samples"))?])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut r = Report { table: Table::new(["period", "fidelity", "error_estimate", "max_adiabaticity"]), ..Default::default() };
    for row in &rows {
        r.table.push_reals(row);
        r.text.push_str(&format!("T = {}: fidelity {}\n", num(row[0]), num(row[1])));
    }
    Ok(r)
}

fn qpc_loss(c: &RunConfig) -> Result<Report, CliError> {
    let kernel = match c.choice("kernel") {
        "local" => Kernel::Local { alpha: c.real("alpha") },
        _ => Kernel::Distance { a: c.real("a"), d: c.real("d"), alpha: c.real("alpha") },
    };
    let array = QpcArray::new(kernel, c.real("rate"), c.int("site_cutoff"))?;
    let sizes = c.ints("n_dots");
    let periods = c.reals_broadcast("periods", sizes.len())?;
    let cross = c.flag("cross_check");
    let omax = c.real("omega_max");
    let results = sizes
        .par_iter()
        .zip(&periods)
        .map(|(&n, &period)| {
            let chain = ChainSpec::new(n, omax)?;
            let s = match c.choice("pulses") {
                "demonstration" => PulseSchedule::demonstration(period, omax)?,
                _ => PulseSchedule::counterintuitive(period, omax)?,
            };
            let loss = qpc::transfer_loss(&array, &chain, &s)?;
            let check = if cross { Some(qpc::lindblad_cross_check(&array, &chain, &s, c.real("dt"))?) } else { None };
            Ok((n, period, loss, check))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut header = vec!["n_dots", "period", "loss", "loss_refined", "max_adiabaticity"];
    if cross {
        header.extend(["loss_lindblad", "loss_closed", "fidelity_lindblad"]);
    }
    let mut r = Report { table: Table::new(header), ..Default::default() };
    for (n, period, loss, check) in &results {
        let mut row = vec![n.to_string(), num(*period), num(loss.value), num(loss.refined), num(loss.max_adiabaticity)];
        if let Some(cc) = check {
            row.extend([num(cc.loss_full), num(1.0 - cc.closed_fidelity), num(cc.fidelity_full)]);
        }
        r.table.push(row);
        r.text.push_str(&format!("{n} dots: loss {}\n", num(loss.value)));
        if let Some(w) = &loss.warning {
            r.text.push_str(&format!("  warning: {w}\n"));
        }
    }
    r.put("kappa", qpc::kappa(&array));
    r.put("dephasing_rate_nearest", qpc::dephasing_rate_sep(&array, 1));
    Ok(r)
}

fn tls_run(c: &RunConfig) -> Result<Report, CliError> {
    let (chain, s) = chain_and_schedule(c, c.real("period"))?;
    let n = chain.n_dots();
    let bath = TlsBath::new(c.reals_broadcast("chi", n)?, c.reals_broadcast("omega", n)?)?;
    let input = TransportInput::Site(c.int("input_site"));
    let run = tls::transport_with_tls(&chain, &s, &bath, &input, c.real("dt"), c.int("record_every"), c.int("memory_budget"))?;
    let mut r = Report { table: Table::new(["t".to_string(), "purity".into()].into_iter().chain(site_columns("pop", n))), ..Default::default() };
    let mut pops = vec![Vec::with_capacity(run.times.len()); n];
    for ((t, rho), purity) in run.times.iter().zip(&run.rho).zip(&run.purity) {
        let mut row = vec![*t, *purity];
        for (k, series) in pops.iter_mut().enumerate() {
            let p = rho.matrix()[(k, k)].re;
            series.push(p);
            row.push(p);
        }
        r.table.push_reals(&row);
    }
    let window = c.int("oscillation_window");
    let osc = oscillation_amplitude_of(&pops, window);
    let crossing = tls::crossing_condition_schedule(&chain, &s, &bath, c.int("crossing_samples"))?;
    r.put("final_fidelity", run.fidelity);
    r.put("final_purity", run.purity.last().copied().unwrap_or(1.0));
    r.put("blocks", run.weights.len());
    r.put("oscillation_amplitude", osc);
    r.put("crossing_satisfied", crossing.satisfied);
    r.put("crossing_margin", crossing.margin);
    r.text = format!("final fidelity {}, oscillation amplitude {}\n", num(run.fidelity), num(osc));
    Ok(r)
}

fn oscillation_amplitude_of(pops: &[Vec<f64>], window: usize) -> f64 {
    let ends = [pops.first(), pops.last()];
    ends.into_iter().flatten().map(|p| tls::oscillation_amplitude(p, window)).fold(0.0, f64::max)
}

fn gas(c: &RunConfig) -> Result<GasModel, CliError> {
    Ok(GasModel::new(c.real("n_g"), c.real("temperature"), c.real("m_g"), c.real("w_g"), c.real("delta"))?)
}

fn initial(c: &RunConfig) -> InitialDistribution {
    InitialDistribution { x_mean: c.real("x_mean"), x_sd: c.real("x_sd"), p_mean: c.real("p_mean"), p_sd: c.real("p_sd") }
}

fn closure(c: &RunConfig) -> Closure {
    match c.choice("closure") {
        "kramers" => Closure::Kramers,
        _ => Closure::Gaussian,
    }
}

fn output_times(c: &RunConfig, gamma: f64) -> Result<Vec<f64>, CliError> {
    let n = c.int("n_times");
    let end = c.real("t_end_gamma");
    if n == 0 || end <= 0.0 {
        return Err(CliError::Config("n_times and t_end_gamma must be positive".into()));
    }
    Ok((1..=n).map(|k| end * k as f64 / n as f64 / gamma).collect())
}

const MOMENTS: [&str; 5] = ["x", "p", "x2", "p2", "xp"];

fn classical_mc(c: &RunConfig) -> Result<Report, CliError> {
    let g = gas(c)?;
    let m = c.real("m");
    let gamma = g.gamma(m);
    let times = output_times(c, gamma)?;
    let init = initial(c);
    let stats = match c.choice("statistics") {
        "thermal" => Statistics::Thermal,
        _ => Statistics::Flux,
    };
    let run = classical::ensemble(&g, m, &init, &times, c.int("trajectories"), c.seed("seed"), stats)?;
    let settings = MomentSettings { closure: closure(c), delta_term: false };
    let ode = qbm::evolve_moments(&g, m, init.moments(), &times, c.real("dt_gamma") / gamma, settings)?;
    let header = std::iter::once("t".to_string())
        .chain(MOMENTS.iter().flat_map(|k| [format!("mc_{k}"), format!("se_{k}"), format!("ode_{k}")]));
    let mut r = Report { table: Table::new(header), ..Default::default() };
    let mut worst = 0.0f64;
    for (i, t) in times.iter().enumerate() {
        let (a, s, b) = (run.mean[i].to_array(), run.stderr[i].to_array(), ode.moments[i].to_array());
        let mut row = vec![*t];
        for j in 0..5 {
            row.extend([a[j], s[j], b[j]]);
            if s[j] > 0.0 {
                worst = worst.max(((a[j] - b[j]) / s[j]).abs());
            }
        }
        r.table.push_reals(&row);
    }
    r.put("gamma", gamma);
    r.put("collisions", run.collisions);
    r.put("max_abs_z", worst);
    r.text = format!("{} trajectories, {} collisions, max |MC - ODE|/stderr {}\n", run.trajectories, run.collisions, num(worst));
    Ok(r)
}

fn qbm_moments(c: &RunConfig) -> Result<Report, CliError> {
    let g = gas(c)?;
    let m = c.real("m");
    let gamma = g.gamma(m);
    let times = output_times(c, gamma)?;
    let settings = MomentSettings { closure: closure(c), delta_term: c.flag("delta_term") };
    let init = initial(c).moments();
    let traj = qbm::evolve_moments(&g, m, init, &times, c.real("dt_gamma") / gamma, settings)?;
    let mut r = Report { table: Table::new(["t", "x", "p", "var_x", "var_p", "cov_xp", "det_cov"]), ..Default::default() };
    for (t, mv) in std::iter::once((&0.0, &init)).chain(traj.times.iter().zip(&traj.moments)) {
        r.table.push_reals(&[*t, mv.x, mv.p, mv.var_x(), mv.var_p(), mv.cov_xp(), mv.covariance_determinant()]);
    }
    let sf = qbm::standard_form_coeffs(&g, m, c.flag("delta_term"));
    r.put("gamma", sf.gamma);
    r.put("d_pp", sf.d_pp);
    r.put("d_xx", sf.d_xx);
    r.put("lindblad_ok", sf.lindblad_ok);
    r.put("heavy_limit_violated", sf.heavy_limit_violated);
    r.put("slow_limit_violated", traj.slow_limit_violated);
    r.put("max_relative_speed", traj.max_relative_speed);
    let last: &MomentVector = traj.moments.last().unwrap_or(&init);
    r.text = format!("final <p^2>/(mT) = {}\n", num(last.p2 / (m * g.temperature)));
    Ok(r)
}

fn collide(c: &RunConfig) -> Result<Report, CliError> {
    let alpha = c.real("alpha");
    if alpha <= 0.0 {
        return Err(CliError::Config("alpha must be positive".into()));
    }
    let (w, m) = (c.real("w"), c.real("m"));
    let input = CollisionInput {
        brownian: GaussianLabel::new(c.real("x"), c.real("p"), w, m)?,
        gas: GaussianLabel::new(c.real("x_g"), c.real("p_g"), w / alpha.sqrt(), alpha * m)?,
    };
    let t = c.real("t");
    let out = collision::scatter(&input);
    let mut r = Report::default();
    match c.choice("observable") {
        "position" => {
            let grid = PositionGrid::span(c.real("x_min"), c.real("x_max"), c.int("n_x"))?;
            r.table = Table::new(["x", "density"]);
            for x in grid.points() {
                r.table.push_reals(&[x, collision::in_collision_position_density(&input, t, x)?]);
            }
        }
        _ => {
            let grid = PositionGrid::span(c.real("x_min"), c.real("x_max"), c.int("n_x"))?;
            let md = collision::in_collision_momentum_density(&input, t, &grid, (c.real("p_min"), c.real("p_max"), c.int("n_p")))?;
            r.table = Table::new(["p", "density"]);
            for (p, d) in md.ps.iter().zip(&md.density) {
                r.table.push_reals(&[*p, *d]);
            }
            r.put("momentum_norm", md.norm);
        }
    }
    let (wa, wb) = collision::branch_weights(&input, t)?;
    r.put("out_x", out.brownian.x);
    r.put("out_p", out.brownian.p);
    r.put("out_x_g", out.gas.x);
    r.put("out_p_g", out.gas.p);
    r.put("collision_time", out.report.t_c);
    r.put("labels_valid", out.report.all_ok());
    r.put("branch_weight_incoming", wa);
    r.put("branch_weight_reflected", wb);
    r.text = format!("outgoing momenta {} and {}\n", num(out.brownian.p), num(out.gas.p));
    Ok(r)
}

fn wigner_sweep(c: &RunConfig) -> Result<Report, CliError> {
    let (w, m, alpha) = (c.real("w"), c.real("m"), c.real("alpha"));
    let position = c.choice("cat") == "position";
    let (half_x, half_p) = if position { (c.real("x_sep") / 2.0, 0.0) } else { (0.0, c.real("p_sep") / 2.0) };
    let cat = CatState::pure(GaussianLabel::new(half_x, half_p, w, m)?, GaussianLabel::new(-half_x, -half_p, w, m)?)?;
    let (n, seed, window) = (c.int("samples"), c.seed("seed"), c.real("t_window"));
    let m_g = alpha * m;
    let temps = c.reals("temperatures");
    let rows = temps
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let task_seed = measq::rng::stream(seed, i as u64).next_u64();
            let est = wigner::mc_decoherence(&cat, &DecoherenceMc::new(t, alpha, window, n, task_seed)?)?;
            let (offset, law, small) = if position {
                (0.0, wigner::position_decoherence(cat.x_diff(), t, m_g), wigner::position_decoherence_small(cat.x_diff(), t, m_g))
            } else {
                let base = wigner::mc_decoherence(&cat, &DecoherenceMc::new(t, alpha, 0.0, n, task_seed)?)?;
                (
                    base.per_collision,
                    wigner::momentum_decoherence(cat.p_diff(), t, m_g, m, window),
                    wigner::momentum_decoherence_small(cat.p_diff(), t, m_g, m, window),
                )
            };
            Ok(vec![t, est.per_collision, est.std_error, offset, law, small, est.initial_value, est.final_value])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let header = ["temperature", "per_collision", "std_error", "offset", "law", "law_small", "initial_value", "final_value"];
    let mut r = Report { table: Table::new(header), ..Default::default() };
    for row in &rows {
        r.table.push_reals(row);
        r.text.push_str(&format!("T = {}: {} +- {} per collision (law {})\n", num(row[0]), num(row[1] - row[3]), num(row[2]), num(row[4])));
    }
    Ok(r)
}

fn validity(c: &RunConfig) -> Result<Report, CliError> {
    let check = measurement::validity_check(&gas(c)?, c.real("m"));
    let mut r = Report { table: Table::new(["name", "statement", "small", "large", "ok"]), ..Default::default() };
    for k in &check.checks {
        r.table.push(vec![k.name.clone(), k.statement.clone(), num(k.small), num(k.large), k.ok.to_string()]);
    }
    let violated = check.violated();
    r.put("headline", check.headline);
    r.put("all_ok", check.all_ok());
    r.put("violated", violated.join(","));
    r.text = check.table();
    r.text.push_str(&if violated.is_empty() { "all inequalities hold\n".to_string() } else { format!("violated: {}\n", violated.join(", ")) });
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schemas_have_unique_snake_case_keys_and_parseable_defaults() {
        for cmd in COMMANDS {
            let mut keys: Vec<&str> = cmd.params.iter().map(|p| p.key).collect();
            assert!(keys.iter().all(|k| k.chars().all(|ch| ch.is_ascii_lowercase() || ch.is_ascii_digit() || ch == '_')));
            keys.sort_unstable();
            let len = keys.len();
            keys.dedup();
            assert_eq!(keys.len(), len, "{}", cmd.name);
            RunConfig::resolve(cmd.name, cmd.params, None, &[], ".".into()).unwrap();
        }
    }
}
