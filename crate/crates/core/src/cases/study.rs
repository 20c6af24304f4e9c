use super::meshes::fracture_midpoint;
use super::{build_mesh, diagonal_profile, fracture_jump_at, CaseName, MeshKind, MeshOptions};
use crate::analysis::{compute_errors, mesh_size, rates, ErrorReport, Rate};
use crate::mesh::StaggeredMesh;
use crate::spaces::{write_samples, DofLayout};
use crate::system::{solve, Solution, SolveStats};
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// One convergence study: a case on one mesh family for several degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub case: CaseName,
    pub mesh: MeshKind,
    pub ks: Vec<usize>,
    /// Levels `1..=levels`.
    pub levels: usize,
    pub mesh_options: MeshOptions,
    /// Directory for the CSV and plot data; nothing is written when `None`.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub case: CaseName,
    pub mesh: MeshKind,
    pub k: usize,
    pub level: usize,
    pub h: f64,
    pub ndof_u: usize,
    pub ndof_p: usize,
    pub ndof_pg: usize,
    /// `None` for problems without a closed-form solution.
    pub errors: Option<ErrorReport>,
    /// Rates of `err_u`, `err_p`, `err_pG` against the previous level.
    pub rates: Option<[Rate; 3]>,
    pub stats: SolveStats,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyFailure {
    pub k: usize,
    pub level: usize,
    pub stage: &'static str,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StudyResult {
    pub rows: Vec<StudyRow>,
    pub failures: Vec<StudyFailure>,
    /// Files written under the output directory.
    pub files: Vec<PathBuf>,
}

impl StudyResult {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn series(&self, k: usize) -> impl Iterator<Item = &StudyRow> {
        self.rows.iter().filter(move |r| r.k == k)
    }
}

fn stem(cfg: &StudyConfig) -> String {
    format!("{}_{}", cfg.case, cfg.mesh)
}

/// Runs every `(k, level)` of the study. A failing stage ends that degree's series
/// and is recorded; the other degrees continue.
pub fn run_study(cfg: &StudyConfig) -> io::Result<StudyResult> {
    let case = cfg.case.definition();
    let mut result = StudyResult::default();
    let mut meshes: Vec<Result<StaggeredMesh, String>> = Vec::with_capacity(cfg.levels);
    for level in 1..=cfg.levels {
        let m = build_mesh(&case, cfg.mesh, level, &cfg.mesh_options)
            .map_err(|e| format!("mesh: {e}"))
            .and_then(|m| StaggeredMesh::build(&m).map_err(|e| format!("staggered mesh: {e}")));
        meshes.push(m);
    }
    let mut finest: Vec<(usize, StaggeredMesh, DofLayout, Solution)> = Vec::new();

    for &k in &cfg.ks {
        let mut last: Option<(StaggeredMesh, DofLayout, Solution)> = None;
        let mut series: Vec<StudyRow> = Vec::new();
        for level in 1..=cfg.levels {
            let fail = |stage: &'static str, reason: String| StudyFailure { k, level, stage, reason };
            let mesh = match &meshes[level - 1] {
                Ok(m) => m,
                Err(e) => {
                    result.failures.push(fail("mesh", e.clone()));
                    break;
                }
            };
            let start = Instant::now();
            let layout = match DofLayout::new(mesh, k) {
                Ok(l) => l,
                Err(e) => {
                    result.failures.push(fail("layout", e.to_string()));
                    break;
                }
            };
            let coeffs = match case.coefficients(mesh) {
                Ok(c) => c,
                Err(e) => {
                    result.failures.push(fail("coefficients", e.to_string()));
                    break;
                }
            };
            let sol = match solve(mesh, &layout, &coeffs, &case) {
                Ok(s) => s,
                Err(e) => {
                    result.failures.push(fail("solve", e.to_string()));
                    break;
                }
            };
            let errors = case.exact().map(|ex| compute_errors(mesh, &layout, &coeffs, &sol, ex));
            if errors.is_some_and(|e| !e.is_finite()) {
                result.failures.push(fail("errors", "non-finite error measure".into()));
                break;
            }
            let rates = match (series.last().and_then(|r| r.errors.map(|e| (r.h, e))), errors) {
                (Some((h0, e0)), Some(e1)) => {
                    let h = [h0, e1.h];
                    Some([rates(&h, &[e0.err_u, e1.err_u])[0], rates(&h, &[e0.err_p, e1.err_p])[0], rates(&h, &[e0.err_pg, e1.err_pg])[0]])
                }
                _ => None,
            };
            let row = StudyRow {
                case: cfg.case,
                mesh: cfg.mesh,
                k,
                level,
                h: mesh_size(mesh),
                ndof_u: layout.num_flux(),
                ndof_p: layout.num_pressure(),
                ndof_pg: layout.num_fracture_nodes(),
                errors,
                rates,
                stats: sol.stats.clone(),
                seconds: start.elapsed().as_secs_f64(),
            };
            log::info!(
                "{} {} k={k} level={level}: h={:.4e} ndof={:?} err_p={:.3e} ({:.2}s)",
                cfg.case,
                cfg.mesh,
                row.h,
                sol.ndof(),
                errors.map_or(f64::NAN, |e| e.err_p),
                row.seconds
            );
            series.push(row);
            last = Some((mesh.clone(), layout, sol));
        }
        result.rows.extend(series);
        if let Some((m, l, s)) = last {
            finest.push((k, m, l, s));
        }
    }

    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir)?;
        let stem = stem(cfg);
        let csv = dir.join(format!("{stem}.csv"));
        write_csv(&result.rows, BufWriter::new(fs::File::create(&csv)?))?;
        result.files.push(csv);
        let conv = dir.join(format!("{stem}_convergence.dat"));
        write_convergence(&result.rows, BufWriter::new(fs::File::create(&conv)?))?;
        result.files.push(conv);
        for (k, mesh, layout, sol) in &finest {
            result.files.extend(write_fields(dir, &stem, *k, mesh, layout, sol, cfg)?);
        }
        if !result.failures.is_empty() {
            let path = dir.join(format!("{stem}_failures.txt"));
            let mut s = String::new();
            for f in &result.failures {
                let _ = writeln!(s, "k={} level={} stage={}: {}", f.k, f.level, f.stage, f.reason);
            }
            fs::write(&path, s)?;
            result.files.push(path);
        }
    }
    Ok(result)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| format!("{v:.10e}"))
}

/// Writes the study table. Only deterministic quantities are included, so identical
/// configurations produce identical bytes.
pub fn write_csv(rows: &[StudyRow], mut w: impl Write) -> io::Result<()> {
    writeln!(w, "case,mesh_kind,k,level,h,ndof_u,ndof_p,ndof_pG,err_u,err_p,err_pG,super_p,super_pG,rate_u,rate_p,rate_pG")?;
    for r in rows {
        let e = r.errors;
        let rate = |i: usize| r.rates.map_or(String::new(), |x| match x[i] {
            Rate::Value(v) => format!("{v:.4}"),
            Rate::Exact => "exact".into(),
        });
        writeln!(
            w,
            "{},{},{},{},{:.10e},{},{},{},{},{},{},{},{},{},{},{}",
            r.case,
            r.mesh,
            r.k,
            r.level,
            r.h,
            r.ndof_u,
            r.ndof_p,
            r.ndof_pg,
            fmt_opt(e.map(|e| e.err_u)),
            fmt_opt(e.map(|e| e.err_p)),
            fmt_opt(e.map(|e| e.err_pg)),
            fmt_opt(e.map(|e| e.super_p)),
            fmt_opt(e.map(|e| e.super_pg)),
            rate(0),
            rate(1),
            rate(2)
        )?;
    }
    w.flush()
}

/// `k ndof err_u err_p err_pG` per row, whitespace separated, for error-vs-dof plots.
fn write_convergence(rows: &[StudyRow], mut w: impl Write) -> io::Result<()> {
    writeln!(w, "# k level ndof err_u err_u_l2 err_p err_pG")?;
    for r in rows {
        let Some(e) = r.errors else { continue };
        writeln!(w, "{} {} {} {:.10e} {:.10e} {:.10e} {:.10e}", r.k, r.level, r.ndof_u + r.ndof_p + r.ndof_pg, e.err_u, e.err_u_l2, e.err_p, e.err_pg)?;
    }
    w.flush()
}

fn write_fields(dir: &Path, stem: &str, k: usize, mesh: &StaggeredMesh, layout: &DofLayout, sol: &Solution, cfg: &StudyConfig) -> io::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let p = dir.join(format!("{stem}_k{k}_pressure.csv"));
    write_samples(&sol.p.sample(mesh, layout), BufWriter::new(fs::File::create(&p)?))?;
    files.push(p);
    let u = dir.join(format!("{stem}_k{k}_flux.csv"));
    write_samples(&sol.u.sample(mesh, layout), BufWriter::new(fs::File::create(&u)?))?;
    files.push(u);

    let g = dir.join(format!("{stem}_k{k}_fracture.dat"));
    let mut w = BufWriter::new(fs::File::create(&g)?);
    writeln!(w, "# arclength p_fracture")?;
    let mut s0 = 0.0;
    for (f, fe) in mesh.fracture.iter().enumerate() {
        for i in 0..=4 {
            let u = i as f64 / 4.0;
            writeln!(w, "{:.10e} {:.10e}", s0 + u * fe.length, sol.pg.fracture_at(mesh, layout, f, u).0)?;
        }
        s0 += fe.length;
    }
    w.flush()?;
    files.push(g);

    let case = cfg.case.definition();
    if case.is_fivespot() {
        let d = dir.join(format!("{stem}_k{k}_diagonal.dat"));
        let mut w = BufWriter::new(fs::File::create(&d)?);
        writeln!(w, "# s p(s, s)")?;
        for (s, v) in diagonal_profile(mesh, layout, &sol.p, 400) {
            writeln!(w, "{s:.10e} {v:.10e}")?;
        }
        if let Some(j) = fracture_jump_at(mesh, layout, &sol.p, fracture_midpoint(&case)) {
            writeln!(w, "# jump at fracture midpoint: {j:.10e}")?;
        }
        w.flush()?;
        files.push(d);
    }
    Ok(files)
}
