//! Stage orchestration: each stage runs its prerequisites, collects named
//! checks, and the run produces a JSON report plus optional SVG and CSV
//! artifacts.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::auxiliary::{build_auxiliary, verify_auxiliary, AuxReport, AuxiliaryGroup};
use crate::branch::{
    candidate_base_points, check_group_descent, compute_transitions, construct_system, limit_data,
    prune_to_active, transition_words, verify_branch_properties, BasePoint, Branch, BranchReport,
    BranchStats, BranchSystem, DescentReport, LimitData, Provenance,
};
use crate::check::Check;
use crate::error::Error;
use crate::ford::{
    check_condition_a, relevant_set, vertex_cycles, ConditionAReport, FordDomain, VertexCycle,
};
use crate::group::{
    primitive_hyperbolic_classes, ClassOptions, ConjClass, GroupPresentation, WordBall,
};
use crate::iso::{check_iso_identities, IsoReport};
use crate::render::{render_branches_svg, render_domain_svg};
use crate::spec_file::{BranchSystemFile, GroupSpecFile, Settings};
use crate::transfer::{resonance_scan, ContractionReport, Rect, ScanResult, TransferFamily};
use crate::zeta::{compare_det_vs_zeta, ZetaComparison};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ford,
    Aux,
    Branches,
    Verify,
    Zeta,
    Scan,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Ford,
        Stage::Aux,
        Stage::Branches,
        Stage::Verify,
        Stage::Zeta,
        Stage::Scan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ford => "ford",
            Stage::Aux => "aux",
            Stage::Branches => "branches",
            Stage::Verify => "verify",
            Stage::Zeta => "zeta",
            Stage::Scan => "scan",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown stage `{s}`; expected one of ford, aux, branches, verify, zeta, scan"
                )
            })
    }
}

/// Command-line overrides of the settings in a group file.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub stage: Stage,
    pub s_values: Option<Vec<Complex64>>,
    pub order: Option<usize>,
    pub cutoff: Option<usize>,
    pub grid: Option<usize>,
    pub waive: Vec<String>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            stage: Stage::Scan,
            s_values: None,
            order: None,
            cutoff: None,
            grid: None,
            waive: Vec::new(),
        }
    }
}

/// Relative agreement demanded of det(I − M_s) and the Euler product when
/// the truncation bound is smaller.
pub const ZETA_TOL: f64 = 1e-6;
const ISO_TOL: f64 = 1e-8;
const CYCLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SphereSummary {
    pub center: f64,
    pub radius: f64,
    pub word: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FordSection {
    pub cutoff: usize,
    pub ball_size: usize,
    pub iso: IsoReport,
    pub relevant: Vec<SphereSummary>,
    pub relevant_stable: bool,
    pub alpha: f64,
    pub beta: f64,
    pub gaps: Vec<(f64, f64)>,
    pub vertex_cycles: Vec<VertexCycle>,
    pub condition_a: ConditionAReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuxSection {
    pub alpha_prime: f64,
    pub beta_prime: f64,
    pub lambda: f64,
    pub rel_words: Vec<String>,
    pub report: AuxReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchSection {
    pub provenance: Provenance,
    pub candidates: Vec<BasePoint>,
    pub branches: Vec<Branch>,
    pub active: Vec<usize>,
    pub limit_points: usize,
    pub limit_classes: usize,
    pub grid: Option<usize>,
    pub stats: Vec<BranchStats>,
    pub unresolved: usize,
    /// Cardinalities of 𝒢(j, k) at the grid and at twice the grid.
    pub cardinalities: Vec<(String, usize)>,
    pub cardinalities_refined: Option<Vec<(String, usize)>>,
    pub transitions: std::collections::BTreeMap<String, Vec<String>>,
    pub system: BranchSystemFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifySection {
    pub branches: BranchReport,
    pub descent: DescentReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZetaSection {
    pub comparison: ZetaComparison,
    pub charts: usize,
    pub dimension: usize,
    pub contraction: ContractionReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanSection {
    pub rect: Rect,
    pub grid: usize,
    pub order: usize,
    pub result: ScanResult,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub stage: Stage,
    pub cutoff: usize,
    pub settings: Settings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ford: Option<FordSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aux: Option<AuxSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branches: Option<BranchSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<ZetaSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSection>,
    /// Every check of every stage, named `stage.check`.
    pub checks: Vec<Check>,
    pub waived: Vec<String>,
    pub failures: Vec<String>,
    pub pass: bool,
}

impl Report {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// A waiver matches a check by full name or by the part after the stage.
pub fn is_waived(check: &str, waivers: &[String]) -> bool {
    waivers
        .iter()
        .any(|w| w == check || check.split_once('.').is_some_and(|(_, short)| short == w))
}

#[derive(Debug, Clone)]
pub struct Artifacts {
    pub report: Report,
    pub domain_svg: Option<String>,
    pub branches_svg: Option<String>,
    pub zeta_csv: Option<String>,
}

struct BranchState {
    ball: WordBall,
    classes: Vec<ConjClass>,
    limits: LimitData,
    pruned: BranchSystem,
}

fn prefixed(stage: Stage, checks: impl IntoIterator<Item = Check>) -> Vec<Check> {
    checks
        .into_iter()
        .map(|mut c| {
            c.name = format!("{stage}.{}", c.name);
            c
        })
        .collect()
}

fn ford_stage(
    group: &GroupPresentation,
    settings: &Settings,
) -> Result<(FordSection, FordDomain, Vec<Check>), Error> {
    let n = group.word_cutoff;
    let ball = group.enumerate_ball(n)?;
    let iso = check_iso_identities(&ball, settings.iso_samples, None);
    let rel = relevant_set(&ball)?;
    let cycles = vertex_cycles(&rel.domain);
    let cond = check_condition_a(&rel.domain);
    let mut checks = vec![
        Check::new(
            "iso_identities",
            iso.passes(ISO_TOL),
            format!(
                "max violation {:e} over {} elements; {} ill-conditioned chain-rule samples skipped",
                iso.max_violation(),
                iso.elements_checked,
                iso.chain_rule_skipped
            ),
        ),
        Check::new(
            "relevant_stable",
            rel.stable,
            format!("relevant spheres at cutoff {n} and {} agree: {}", n.saturating_sub(1), rel.stable),
        ),
        Check::new(
            "condition_a",
            cond.pass,
            format!("{} of {} summits inside their sides", cond.sides.iter().filter(|s| s.summit_inside).count(), cond.sides.len()),
        ),
    ];
    let cycles = match cycles {
        Ok(cs) => {
            let bad: Vec<String> = cs
                .iter()
                .filter(|c| c.omega.is_none() || c.height_discrepancy >= CYCLE_TOL)
                .map(|c| {
                    format!(
                        "angle sum {} height discrepancy {:e}",
                        c.angle_sum, c.height_discrepancy
                    )
                })
                .collect();
            checks.push(
                Check::new(
                    "vertex_cycles",
                    bad.is_empty(),
                    format!("{} cycles, {} defective", cs.len(), bad.len()),
                )
                .with_witnesses(bad),
            );
            cs
        }
        Err(e) => {
            checks.push(Check::new("vertex_cycles", false, e.to_string()));
            Vec::new()
        }
    };
    let domain = rel.domain.clone();
    let section = FordSection {
        cutoff: n,
        ball_size: ball.len(),
        iso,
        relevant: domain
            .sides
            .iter()
            .map(|s| SphereSummary {
                center: s.sphere.center,
                radius: s.sphere.radius,
                word: s.word.as_ref().map(|w| group.format_word(w)),
            })
            .collect(),
        relevant_stable: rel.stable,
        alpha: domain.alpha,
        beta: domain.beta,
        gaps: domain.gaps.clone(),
        vertex_cycles: cycles,
        condition_a: cond,
    };
    Ok((section, domain, checks))
}

fn cardinality_list(sys: &BranchSystem) -> Vec<(String, usize)> {
    sys.cardinalities()
        .into_iter()
        .map(|((j, k), n)| (format!("{j},{k}"), n))
        .collect()
}

fn branch_stage(
    spec: &GroupSpecFile,
    group: &GroupPresentation,
    aux: &AuxiliaryGroup,
    settings: &Settings,
) -> Result<(BranchSection, BranchSystem, BranchState, Vec<Check>), Error> {
    let n = group.word_cutoff;
    let ball = group.enumerate_ball(n)?;
    let classes =
        primitive_hyperbolic_classes(group, &ball, settings.limit_length, ClassOptions::default());
    let conjugators = group.enumerate_ball(n / 2)?;
    let limits = limit_data(&classes, &conjugators).with_gaps(aux.domain.gaps.clone());
    let candidates = candidate_base_points(aux);

    let (base, supplied) = match &spec.branch_system {
        Some(file) => file.to_system()?,
        None => (construct_system(aux, &spec.name), false),
    };
    let mut checks = Vec::new();
    let (full, stats, unresolved, refined, grid) = if supplied {
        (base, Vec::new(), 0, None, None)
    } else {
        let coarse = compute_transitions(&base, &ball, &limits, settings.grid);
        let fine = compute_transitions(&base, &ball, &limits, 2 * settings.grid);
        let same = coarse.system.cardinalities() == fine.system.cardinalities();
        checks.push(Check::new(
            "finite_ramification",
            same,
            format!(
                "transition cardinalities at grid {} and {} agree: {same}",
                settings.grid,
                2 * settings.grid
            ),
        ));
        let unresolved: Vec<String> = coarse
            .unresolved
            .iter()
            .map(|(j, x, y)| format!("C{j}: ({x}, {y})"))
            .collect();
        checks.push(
            Check::new(
                "shots_resolved",
                unresolved.is_empty(),
                format!(
                    "{} shots without a return inside the ball",
                    unresolved.len()
                ),
            )
            .with_witnesses(unresolved.clone()),
        );
        (
            coarse.system,
            coarse.stats,
            unresolved.len(),
            Some(cardinality_list(&fine.system)),
            Some(settings.grid),
        )
    };
    let pruned = prune_to_active(&full, &limits)?;
    let section = BranchSection {
        provenance: full.provenance,
        candidates,
        branches: full.branches.clone(),
        active: pruned.labels(),
        limit_points: limits.points.len(),
        limit_classes: classes.len(),
        grid,
        stats,
        unresolved,
        cardinalities: cardinality_list(&full),
        cardinalities_refined: refined,
        transitions: transition_words(&pruned, group, &ball),
        system: BranchSystemFile::from_system(&pruned),
    };
    let state = BranchState {
        ball,
        classes,
        limits,
        pruned,
    };
    Ok((section, full, state, checks))
}

fn zeta_csv(cmp: &ZetaComparison) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "re_s",
        "im_s",
        "det_re",
        "det_im",
        "zeta_re",
        "zeta_im",
        "rel_err",
        "tail_bound",
    ])
    .expect("in-memory csv");
    for r in &cmp.rows {
        w.write_record(
            [
                r.s.re,
                r.s.im,
                r.det.re,
                r.det.im,
                r.zeta.re,
                r.zeta.im,
                r.rel_err,
                r.tail_bound,
            ]
            .map(|v| v.to_string()),
        )
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

/// Runs every stage up to `opts.stage`.
pub fn run_pipeline(
    spec: &GroupSpecFile,
    group: &GroupPresentation,
    opts: &RunOptions,
) -> Result<Artifacts, Error> {
    let mut group = group.clone();
    if let Some(n) = opts.cutoff {
        group.word_cutoff = n;
    }
    let mut settings = spec.settings.clone();
    if let Some(s) = &opts.s_values {
        settings.s_values = s.iter().map(|z| [z.re, z.im]).collect();
    }
    if let Some(o) = opts.order {
        settings.order = o;
    }
    if let Some(g) = opts.grid {
        settings.grid = g;
    }
    let want = |st: Stage| st <= opts.stage;

    let mut report = Report {
        name: spec.name.clone(),
        stage: opts.stage,
        cutoff: group.word_cutoff,
        settings: settings.clone(),
        ford: None,
        aux: None,
        branches: None,
        verify: None,
        zeta: None,
        scan: None,
        checks: Vec::new(),
        waived: opts.waive.clone(),
        failures: Vec::new(),
        pass: false,
    };
    let mut artifacts = Artifacts {
        report: report.clone(),
        domain_svg: None,
        branches_svg: None,
        zeta_csv: None,
    };

    let (ford, domain, checks) =
        ford_stage(&group, &settings).map_err(|e| e.in_stage(Stage::Ford))?;
    report.ford = Some(ford);
    report.checks.extend(prefixed(Stage::Ford, checks));
    artifacts.domain_svg = Some(render_domain_svg(Some(&domain), None));

    if want(Stage::Aux) {
        let aux = build_auxiliary(&group, spec.walls())
            .map_err(|e| Error::from(e).in_stage(Stage::Aux))?;
        let aux_report = verify_auxiliary(
            &aux,
            settings.aux_cutoff,
            settings.aux_samples,
            settings.seed,
        );
        report
            .checks
            .extend(prefixed(Stage::Aux, aux_report.checks.clone()));
        report.aux = Some(AuxSection {
            alpha_prime: aux.alpha_prime,
            beta_prime: aux.beta_prime,
            lambda: aux.lambda,
            rel_words: aux.rel_words.clone(),
            report: aux_report,
        });
        artifacts.domain_svg = Some(render_domain_svg(Some(&aux.domain), Some(aux.strip())));

        if want(Stage::Branches) {
            let (section, full, state, checks) = branch_stage(spec, &group, &aux, &settings)
                .map_err(|e| e.in_stage(Stage::Branches))?;
            artifacts.branches_svg = Some(render_branches_svg(
                &full,
                &section.active,
                Some(&aux.domain),
                Some(aux.strip()),
            ));
            report.branches = Some(section);
            report.checks.extend(prefixed(Stage::Branches, checks));

            if want(Stage::Verify) {
                let props = verify_branch_properties(
                    &state.pruned,
                    &group,
                    &state.ball,
                    &state.classes,
                    &state.limits,
                    settings.samples,
                    settings.seed,
                );
                let descent_ball = group
                    .enumerate_ball(settings.descent_cutoff)
                    .map_err(|e| Error::from(e).in_stage(Stage::Verify))?;
                let descent =
                    check_group_descent(&state.pruned, &group, &descent_ball, &state.limits, 2);
                report
                    .checks
                    .extend(prefixed(Stage::Verify, props.checks.clone()));
                report
                    .checks
                    .extend(prefixed(Stage::Verify, descent.checks.clone()));
                report.verify = Some(VerifySection {
                    branches: props,
                    descent,
                });
            }

            if want(Stage::Zeta) {
                let family =
                    TransferFamily::new(state.pruned.clone(), &state.limits, settings.padding)
                        .map_err(|e| Error::from(e).in_stage(Stage::Zeta))?;
                let cmp = compare_det_vs_zeta(
                    &family,
                    &group,
                    &state.ball,
                    &settings.s_list(),
                    settings.order,
                    settings.l_max,
                    settings.k_max,
                )
                .map_err(|e| Error::from(e).in_stage(Stage::Zeta))?;
                let bad: Vec<String> = cmp
                    .rows
                    .iter()
                    .filter(|r| r.rel_err.is_nan() || r.rel_err >= ZETA_TOL.max(r.tail_bound))
                    .map(|r| {
                        format!(
                            "s = {}: rel_err {:e}, bound {:e}",
                            r.s, r.rel_err, r.tail_bound
                        )
                    })
                    .collect();
                let contraction = family.contraction(64);
                let zeta_checks = vec![
                    Check::new(
                        "identity",
                        bad.is_empty(),
                        format!(
                            "{} of {} points within max({ZETA_TOL:e}, tail bound); convention {:?}",
                            cmp.rows.len() - bad.len(),
                            cmp.rows.len(),
                            cmp.convention.chosen
                        ),
                    )
                    .with_witnesses(bad),
                    Check::new(
                        "contraction",
                        contraction.violations.is_empty(),
                        format!("largest |g′| on source charts {:.6}", contraction.worst),
                    ),
                ];
                report.checks.extend(prefixed(Stage::Zeta, zeta_checks));
                artifacts.zeta_csv = Some(zeta_csv(&cmp));
                report.zeta = Some(ZetaSection {
                    charts: family.charts().len(),
                    dimension: family.dimension(settings.order),
                    comparison: cmp,
                    contraction,
                });

                if want(Stage::Scan) {
                    let result = resonance_scan(
                        &family,
                        settings.scan,
                        settings.scan_grid,
                        settings.order,
                        settings.re_floor,
                    )
                    .map_err(|e| Error::from(e).in_stage(Stage::Scan))?;
                    report.scan = Some(ScanSection {
                        rect: settings.scan,
                        grid: settings.scan_grid,
                        order: settings.order,
                        result,
                    });
                }
            }
        }
    }

    report.failures = report
        .checks
        .iter()
        .filter(|c| !c.pass && !is_waived(&c.name, &opts.waive))
        .map(|c| c.name.clone())
        .collect();
    report.pass = report.failures.is_empty();
    artifacts.report = report;
    Ok(artifacts)
}

pub fn report_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes through a temporary file in the same directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), Error> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

/// Writes `report.json` and whichever of `domain.svg`, `branches.svg`,
/// `zeta.csv` the run produced.
pub fn write_artifacts(artifacts: &Artifacts, dir: &Path) -> Result<Vec<PathBuf>, Error> {
    let mut written = Vec::new();
    let mut put = |name: &str, body: &str| -> Result<(), Error> {
        let p = dir.join(name);
        write_atomic(&p, body)?;
        written.push(p);
        Ok(())
    };
    put("report.json", &report_json(&artifacts.report))?;
    if let Some(s) = &artifacts.domain_svg {
        put("domain.svg", s)?;
    }
    if let Some(s) = &artifacts.branches_svg {
        put("branches.svg", s)?;
    }
    if let Some(s) = &artifacts.zeta_csv {
        put("zeta.csv", s)?;
    }
    Ok(written)
}
