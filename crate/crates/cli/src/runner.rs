use std::time::Instant;

use equinuc_core::algebras::{build_action, build_algebra, center};
use equinuc_core::coactions::check_comodule;
use equinuc_core::cpmaps::{validate_certificate, verify_cp, CpMode};
use equinuc_core::crossed::check_compatibility;
use equinuc_core::linalg::ONE;
use equinuc_core::nuclearity::{
    build_field, build_witness, certified_cb_options, check_trace_property, coefficient_basis, defect_sweep,
    expectation_cb_check, expectation_map, normalization_experiment, pd_function, perturbed_identity, rho_prime,
    run_nuclearity_check, standard_context, witness_certificates, witness_lambda_check, NormalizationRecord,
    NuclearityOptions, SweepRow,
};
use equinuc_core::random::seeded;
use equinuc_core::{
    build_group, AmenabilityField, CheckResult, CrossedElement, CrossedSystem, FieldDescriptor, GroupAlgebra,
    GroupTuple, LinearMapOp, NuclearityMode, State, Window, Witness, C64,
};
use rand::Rng;

use crate::config::{ConfigError, Expectation, RunConfig, StateDescriptor, Task, TestSet};
use crate::report::{CheckRecord, Environment, RunReport, StructureInfo};

const LAMBDA_NOTE: &str = "in finite dimensions the identity is a finite-rank map, so the CBAP constant is 1; \
     the lambda-calculus checks verify the bounding inequalities, not a nontrivial constant";

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub parallel: bool,
}

/// Everything built from a configuration before any task runs.
pub struct Prepared {
    pub system: CrossedSystem,
    pub field: AmenabilityField,
    pub field_defaulted: bool,
    pub window: Option<Window>,
    pub witness: Option<Witness>,
    pub state: State,
    pub test_set: Vec<CrossedElement>,
}

pub fn prepare(config: &RunConfig) -> Result<Prepared, ConfigError> {
    let tols = config.tolerance_config()?;
    let group = build_group(&config.group).map_err(|e| ConfigError::at("/group", e.to_string()))?;
    let algebra = build_algebra(&config.algebra).map_err(|e| ConfigError::at("/algebra", e.to_string()))?;
    let action =
        build_action(&group, &algebra, &config.action, &tols).map_err(|e| ConfigError::at("/action", e.to_string()))?;
    let system =
        CrossedSystem::new(algebra, group, action, tols).map_err(|e| ConfigError::at("/action", e.to_string()))?;

    let descriptor = config.field.clone().unwrap_or(FieldDescriptor::Constant);
    let field = build_field(&system, &descriptor).map_err(|e| ConfigError::at("/field", e.to_string()))?;

    let window = match &config.window {
        None => None,
        Some(tuples) => {
            let g = system.group();
            let tuples = tuples
                .iter()
                .enumerate()
                .map(|(i, labels)| {
                    let at = |e: equinuc_core::Error| ConfigError::at(format!("/window/{i}"), e.to_string());
                    let comps = labels
                        .iter()
                        .map(|l| g.index_of(l))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(at)?;
                    GroupTuple::new(comps).map_err(at)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Some(Window::new(tuples).map_err(|e| ConfigError::at("/window", e.to_string()))?)
        }
    };

    let needs_witness = config.tasks.iter().any(|t| {
        matches!(
            t,
            Task::NuclearityModule | Task::NuclearityComodule | Task::LambdaCalculus | Task::Certificates
        )
    });
    let witness = if needs_witness {
        Some(
            build_witness(&field, window.clone(), config.include_pre_factor)
                .map_err(|e| ConfigError::at("/window", e.to_string()))?,
        )
    } else {
        None
    };

    let state = match config.state.as_ref().unwrap_or(&StateDescriptor::NormalizedTrace) {
        StateDescriptor::NormalizedTrace => State::normalized_trace(system.algebra()),
        StateDescriptor::Density { matrix } => matrix
            .to_matrix()
            .and_then(|m| State::from_density(system.algebra(), &m, &tols)),
        StateDescriptor::Values { values } => State::from_values(
            system.algebra(),
            values.iter().map(|[re, im]| C64::new(*re, *im)).collect(),
            &tols,
        ),
    }
    .map_err(|e| ConfigError::at("/state", e.to_string()))?;

    let test_set = match config.test_set {
        TestSet::Basis => coefficient_basis(&system),
        TestSet::Random { count } => {
            let mut rng = seeded(config.seed.wrapping_add(0x7e57));
            (0..count).map(|_| system.random_element(&mut rng)).collect()
        }
    };

    Ok(Prepared {
        system,
        field,
        field_defaulted: config.field.is_none(),
        window,
        witness,
        state,
        test_set,
    })
}

#[derive(Default)]
struct TaskOutput {
    checks: Vec<CheckRecord>,
    structure: Option<StructureInfo>,
    normalization: Option<NormalizationRecord>,
    sweep: Option<Vec<SweepRow>>,
    notes: Vec<String>,
}

impl TaskOutput {
    /// Runs one step, timing it. Check names are prefixed with the task name
    /// unless they already carry it; a failing step becomes a `<task>/error`
    /// record.
    fn step(&mut self, task: Task, f: impl FnOnce() -> equinuc_core::Result<Vec<CheckResult>>) {
        let start = Instant::now();
        let outcome = f();
        let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
        let prefix = format!("{task}/");
        match outcome {
            Ok(checks) => {
                for mut check in checks {
                    if !check.name.starts_with(&prefix) {
                        check.name = format!("{prefix}{}", check.name);
                    }
                    self.checks.push(CheckRecord::from_check(check, elapsed_ms));
                }
            }
            Err(e) => {
                let check = CheckResult::residual(format!("{prefix}error"), f64::NAN, 0.0).with_detail(e.to_string());
                self.checks.push(CheckRecord::from_check(check, elapsed_ms));
            }
        }
    }
}

/// Runs every configured task and assembles the report in task order.
pub fn run(config: &RunConfig, options: RunOptions) -> Result<RunReport, ConfigError> {
    let prepared = prepare(config)?;
    let outputs: Vec<TaskOutput> = if options.parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = config
                .tasks
                .iter()
                .map(|&task| {
                    let prepared = &prepared;
                    scope.spawn(move || run_task(task, config, prepared))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("task threads do not panic"))
                .collect()
        })
    } else {
        config
            .tasks
            .iter()
            .map(|&task| run_task(task, config, &prepared))
            .collect()
    };

    let mut checks = Vec::new();
    let mut structure = None;
    let mut normalization = None;
    let mut sweep = None;
    let mut notes = Vec::new();
    if prepared.field_defaulted
        && config.tasks.iter().any(|t| {
            matches!(
                t,
                Task::NuclearityModule
                    | Task::NuclearityComodule
                    | Task::Normalization
                    | Task::LambdaCalculus
                    | Task::Certificates
            )
        })
    {
        notes.push("no field given; using the constant field".to_string());
    }
    for out in outputs {
        checks.extend(out.checks);
        structure = structure.or(out.structure);
        normalization = normalization.or(out.normalization);
        sweep = sweep.or(out.sweep);
        for note in out.notes {
            if !notes.contains(&note) {
                notes.push(note);
            }
        }
    }
    let summary = RunReport::summarize(&checks);
    Ok(RunReport {
        environment: Environment {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
        },
        tasks: config.tasks.iter().map(|t| t.name().to_string()).collect(),
        checks,
        summary,
        structure,
        normalization,
        sweep,
        notes,
    })
}

fn run_task(task: Task, config: &RunConfig, prep: &Prepared) -> TaskOutput {
    let mut out = TaskOutput::default();
    let sys = &prep.system;
    let tols = *sys.tolerances();
    let seed = config.seed;
    let trials = config.trials;
    match task {
        Task::Structure => {
            out.step(task, || {
                Ok(vec![
                    CheckResult::residual("covariance", sys.covariance_residual(), tols.identity_tol),
                    CheckResult::residual("algebra-closure", sys.algebra().closure_residual()?, tols.identity_tol),
                    CheckResult::residual(
                        "crossed-closure",
                        sys.crossed_algebra().closure_residual()?,
                        tols.identity_tol,
                    ),
                ])
            });
            out.step(task, || {
                let g = sys.group();
                let residual = GroupAlgebra::new(g)?.multiplication_residual(g);
                Ok(vec![CheckResult::residual(
                    "group-algebra",
                    residual,
                    tols.identity_tol,
                )])
            });
            out.step(task, || {
                Ok(vec![check_comodule(sys, &Window::group(sys.group()), trials, seed)?])
            });
            out.structure = structure_info(sys).ok();
        }
        Task::Compatibility => out.step(task, || {
            let window = match &prep.window {
                Some(w) => w.translation_closure(sys.group())?,
                None => Window::group(sys.group()),
            };
            let mut check = check_compatibility(sys, &window, trials, seed)?;
            check.name = "module-action".into();
            Ok(vec![check])
        }),
        Task::Expectation => out.step(task, || expectation_checks(sys, trials, seed)),
        Task::NuclearityModule | Task::NuclearityComodule => out.step(task, || {
            let mode = if task == Task::NuclearityModule {
                NuclearityMode::Module
            } else {
                NuclearityMode::Comodule
            };
            let opts = NuclearityOptions {
                trials,
                seed,
                include_pre_factor: config.include_pre_factor,
                window: prep.window.clone(),
            };
            Ok(run_nuclearity_check(&prep.field, &prep.test_set, config.epsilon, mode, &opts)?.checks)
        }),
        Task::Normalization => {
            let mut record = None;
            out.step(task, || {
                let r = normalization_experiment(&prep.field)?;
                let checks = r.checks();
                record = Some(r);
                Ok(checks)
            });
            if let Some(r) = record {
                out.notes.push(r.note.clone());
                out.normalization = Some(r);
            }
        }
        Task::DefectSweep => {
            let mut sweep = None;
            out.step(task, || {
                let rows = defect_sweep(sys)?;
                let last = rows.last().expect("groups are nonempty");
                let mut rise: f64 = 0.0;
                for pair in rows.windows(2) {
                    for (before, after) in pair[0].errors.iter().zip(&pair[1].errors) {
                        rise = rise.max(after - before);
                    }
                }
                let checks = vec![
                    CheckResult::residual("final-error", last.max_error, 1e-10),
                    CheckResult::residual("final-defect", last.max_defect, 1e-10),
                    CheckResult::residual("monotone", rise, tols.identity_tol),
                ];
                sweep = Some(rows);
                Ok(checks)
            });
            out.sweep = sweep;
        }
        Task::PdFunction => out.step(task, || pd_checks(sys, &prep.state, trials, seed)),
        Task::TraceProperty => out.step(task, || {
            let rp = rho_prime(sys, &prep.state)?;
            let mut check = check_trace_property(sys, &rp, trials, seed);
            check.name = "residual".into();
            Ok(vec![check])
        }),
        Task::LambdaCalculus => {
            let witness = prep.witness.as_ref().expect("prepared for this task");
            out.step(task, || {
                let report = witness_lambda_check(witness, &certified_cb_options(seed))?;
                let expected = witness.scale();
                let worst = report
                    .compositions
                    .iter()
                    .map(|c| (c - expected).abs())
                    .fold(0.0, f64::max);
                let mut checks = vec![
                    CheckResult::residual("m1", (report.m1 - 1.0).abs(), tols.identity_tol),
                    CheckResult::residual("m2", (report.m2 - expected).abs(), tols.identity_tol),
                    CheckResult::residual("composition", worst, tols.identity_tol)
                        .with_detail(format!("expected cb norm {expected:.12}")),
                ];
                checks.extend(report.checks.into_iter().map(|mut c| {
                    c.name = c.name.replace("lambda/", "");
                    c
                }));
                Ok(checks)
            });
            out.step(task, || {
                let mut check = expectation_cb_check(sys, trials, seed, &certified_cb_options(seed))?;
                check.name = "expectation".into();
                Ok(vec![check])
            });
            out.notes.push(LAMBDA_NOTE.to_string());
        }
        Task::Certificates => {
            let witness = prep.witness.as_ref().expect("prepared for this task");
            let ctx = match standard_context(witness, seed) {
                Ok(ctx) => ctx,
                Err(e) => {
                    out.step(task, || Err(e));
                    return out;
                }
            };
            for mode in [NuclearityMode::Module, NuclearityMode::Comodule] {
                let label = match mode {
                    NuclearityMode::Module => "witness-module",
                    NuclearityMode::Comodule => "witness-comodule",
                };
                for (name, cert) in witness_certificates(witness, mode) {
                    out.step(task, || {
                        let mut check = validate_certificate(&cert, &ctx)?;
                        check.name = format!("{label}/{name}");
                        Ok(vec![check])
                    });
                }
            }
            for case in &config.certificates {
                out.step(task, || {
                    let (outcome, detail) = match validate_certificate(&case.certificate, &ctx) {
                        Ok(check) if check.pass => (Expectation::Pass, format!("value {:.3e}", check.value)),
                        Ok(check) => (
                            Expectation::Fail,
                            check.detail.unwrap_or_else(|| format!("value {:.3e}", check.value)),
                        ),
                        Err(e) => (Expectation::Error, e.to_string()),
                    };
                    let matched = outcome == case.expect;
                    Ok(vec![CheckResult::residual(
                        format!("case/{}", case.name),
                        if matched { 0.0 } else { 1.0 },
                        0.0,
                    )
                    .with_detail(
                        format!("expected {:?}, got {:?}: {detail}", case.expect, outcome).to_lowercase(),
                    )])
                });
            }
        }
    }
    out
}

fn structure_info(sys: &CrossedSystem) -> equinuc_core::Result<StructureInfo> {
    Ok(StructureInfo {
        group_order: sys.group().order(),
        algebra_dim: sys.algebra().dim(),
        algebra_center_dim: center(sys.algebra())?.dim(),
        ambient_dim: sys.ambient_dim(),
        crossed_dim: sys.crossed_algebra().dim(),
        crossed_center_dim: center(sys.crossed_algebra())?.dim(),
    })
}

fn expectation_checks(sys: &CrossedSystem, trials: usize, seed: u64) -> equinuc_core::Result<Vec<CheckResult>> {
    let tols = sys.tolerances();
    let e = expectation_map(sys);
    let mut ucp = verify_cp(&e, CpMode::Ucp, tols)?;
    ucp.name = "ucp".into();
    let idempotent = sys
        .crossed_algebra()
        .basis()
        .iter()
        .map(|b| {
            let once = e.apply(b);
            e.apply(&once).max_abs_diff(&once)
        })
        .fold(0.0, f64::max);
    let mut rng = seeded(seed);
    let mut bimodule: f64 = 0.0;
    for _ in 0..trials {
        let a = sys.pi(&sys.random_algebra_element(&mut rng));
        let b = sys.pi(&sys.random_algebra_element(&mut rng));
        let x = sys.represent(&sys.random_element(&mut rng));
        let lhs = e.apply(&a.matmul(&x).matmul(&b));
        let rhs = a.matmul(&e.apply(&x)).matmul(&b);
        bimodule = bimodule.max(lhs.max_abs_diff(&rhs));
    }
    Ok(vec![
        ucp,
        CheckResult::residual("idempotent", idempotent, tols.identity_tol),
        CheckResult::residual("bimodule", bimodule, tols.identity_tol),
    ])
}

fn pd_checks(sys: &CrossedSystem, state: &State, trials: usize, seed: u64) -> equinuc_core::Result<Vec<CheckResult>> {
    let tols = sys.tolerances();
    let g = sys.group();
    let mut checks = Vec::new();
    let named = |label: &str, cs: Vec<CheckResult>| -> Vec<CheckResult> {
        cs.into_iter()
            .map(|mut c| {
                c.name = c.name.replace("pd-function/", &format!("{label}/"));
                c
            })
            .collect()
    };

    let identity = pd_function(sys, &LinearMapOp::identity(sys.crossed_algebra()), state)?;
    checks.extend(named("identity", identity.checks(tols)));
    checks.push(CheckResult::residual(
        "identity/constant",
        identity.max_deviation(),
        tols.identity_tol,
    ));

    let expectation = pd_function(sys, &expectation_map(sys), state)?;
    checks.extend(named("expectation", expectation.checks(tols)));
    let delta = expectation
        .values()
        .iter()
        .enumerate()
        .map(|(s, w)| if s == g.identity() { (w - ONE).norm() } else { w.norm() })
        .fold(0.0, f64::max);
    checks.push(CheckResult::residual("expectation/delta", delta, tols.identity_tol));

    let mut rng = seeded(seed);
    let mut gram_min = f64::INFINITY;
    let mut unit: f64 = 0.0;
    let mut bound: f64 = 0.0;
    for _ in 0..trials {
        let epsilon = rng.gen_range(0.05..0.95);
        let phi = perturbed_identity(sys, &mut rng, epsilon)?;
        let omega = pd_function(sys, &phi, state)?;
        for c in omega.checks(tols) {
            match c.name.as_str() {
                "pd-function/gram-min-eig" => gram_min = gram_min.min(c.value),
                "pd-function/unit" => unit = unit.max(c.value),
                _ => bound = bound.max(c.value),
            }
        }
    }
    checks.push(CheckResult::lower_bound("random/gram-min-eig", gram_min, tols.psd_tol));
    checks.push(CheckResult::residual("random/unit", unit, tols.identity_tol));
    checks.push(
        CheckResult::residual("random/bound", bound, tols.identity_tol)
            .with_detail(format!("{trials} perturbed u.c.p. maps")),
    );
    Ok(checks)
}
