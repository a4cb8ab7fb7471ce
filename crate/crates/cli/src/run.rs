//! Execution of the four subcommands.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use cutmesh::convergence_harness::{estimate_rate, run_study, StudyConfig};
use cutmesh::decomposition::{decompose_multi, map_to_physical, reconstruct_mesh, DecompositionConfig, DecompositionResult};
use cutmesh::levelset::{sample_to_mesh, LevelSetField, DEFAULT_PERTURBATION};
use cutmesh::mesh::BackgroundMesh;
use cutmesh::quadrature::{build_rule, map_rule_surface, map_rule_volume_nodes, Placement};
use cutmesh::reconstruction::ReconstructionConfig;
use cutmesh::reference_elements::ReferenceElement;

use crate::config::{Command, RunConfig};
use crate::export::{decomposition_mesh, interface_mesh};
use crate::results::{format_region_csv, write_convergence_csv, write_file};
use crate::CliError;

/// Runs `cfg` and returns a short report for the terminal.
pub fn execute(cfg: &RunConfig) -> Result<String, CliError> {
    match (cfg.command, cfg.level_set.dim()) {
        (Command::Convergence, _) => convergence(cfg),
        (_, 2) => single_mesh::<2>(cfg),
        _ => single_mesh::<3>(cfg),
    }
}

fn reconstruction(cfg: &RunConfig) -> ReconstructionConfig {
    ReconstructionConfig {
        variant: cfg.variant,
        depth_limit: cfg.depth_limit,
        ..Default::default()
    }
}

fn sampled<const D: usize>(cfg: &RunConfig) -> Result<(BackgroundMesh<D>, LevelSetField), CliError> {
    let mesh = BackgroundMesh::<D>::structured(cfg.n, cfg.order, [-1.0; D], [1.0; D])?;
    let mut fields = sample_to_mesh(&[cfg.level_set.field()], &mesh, DEFAULT_PERTURBATION);
    if let Err(cutmesh::Error::SingularPoint { .. }) = fields {
        // the flower is undefined at the origin, which lies well inside it
        let f = cfg.level_set.field();
        let values = mesh
            .nodes()
            .iter()
            .map(|x| f.evaluate(x.as_slice()).unwrap_or(-0.5))
            .collect();
        fields = LevelSetField::from_values(vec![values]);
    }
    Ok((mesh, fields?))
}

fn single_mesh<const D: usize>(cfg: &RunConfig) -> Result<String, CliError> {
    let (mesh, field) = sampled::<D>(cfg)?;
    let path = cfg.output_path();
    let mut report = String::new();
    match cfg.command {
        Command::Reconstruct => {
            let interfaces = reconstruct_mesh(&mesh, &field, 0, &reconstruction(cfg))?;
            let mut measure = 0.0;
            for (e, ei) in interfaces.iter().enumerate() {
                let xe = mesh.element_nodes(e);
                for i in &ei.interfaces {
                    let elem = ReferenceElement::cached(i.family, i.order)?;
                    let rule = build_rule(i.family, cfg.quad_order)?;
                    let placement = Placement {
                        element: mesh.reference(),
                        nodes: &xe,
                    };
                    measure += map_rule_surface(&rule, elem, &i.nodes, Some(placement))?.measure();
                }
            }
            let cut = interfaces.iter().filter(|e| !e.interfaces.is_empty()).count();
            let refined = interfaces.iter().filter(|e| e.refinements > 0).count();
            interface_mesh(&interfaces, &mesh, cfg.export_density)?.write_vtk(&path, "cutmesh interface")?;
            writeln!(report, "cut elements {cut}, refined {refined}").unwrap();
            writeln!(report, "interface measure {measure:.15e}").unwrap();
        }
        Command::Decompose => {
            let result = decompose(cfg, &mesh, &field)?;
            let mut regions: BTreeMap<String, (f64, usize)> = BTreeMap::new();
            for s in map_to_physical(&result, &mesh)? {
                let elem = ReferenceElement::cached(s.family, s.order)?;
                let rule = build_rule(s.family, cfg.quad_order)?;
                let m = map_rule_volume_nodes(&rule, elem, &s.nodes)?.measure();
                let entry = regions.entry(s.signs.to_string()).or_insert((0.0, 0));
                entry.0 += m;
                entry.1 += 1;
            }
            write_file(&path, &format_region_csv(&regions))?;
            writeln!(
                report,
                "cut elements {}, refined {}",
                result.cut_elements(),
                result.refined_elements()
            )
            .unwrap();
            for (signs, (m, _)) in &regions {
                writeln!(report, "region {signs}: {m:.15e}").unwrap();
            }
        }
        Command::ExportMesh => {
            let result = decompose(cfg, &mesh, &field)?;
            let out = decomposition_mesh(&result, &mesh, cfg.export_density)?;
            out.write_vtk(&path, "cutmesh decomposition")?;
            writeln!(report, "{} points, {} cells", out.points.len(), out.cells.len()).unwrap();
        }
        Command::Convergence => unreachable!("handled by convergence()"),
    }
    writeln!(report, "wrote {}", path.display()).unwrap();
    Ok(report)
}

fn decompose<const D: usize>(
    cfg: &RunConfig,
    mesh: &BackgroundMesh<D>,
    field: &LevelSetField,
) -> Result<DecompositionResult<D>, CliError> {
    let dcfg = DecompositionConfig {
        reconstruction: reconstruction(cfg),
        ..Default::default()
    };
    Ok(decompose_multi(mesh, field, &dcfg)?)
}

fn convergence(cfg: &RunConfig) -> Result<String, CliError> {
    let mut study = StudyConfig::new(cfg.level_set.field(), cfg.order)?
        .with_variant(cfg.variant)
        .with_kind(cfg.study);
    if let Some(r) = &cfg.resolutions {
        study = study.with_resolutions(r);
    }
    study.quadrature_order = cfg.quad_order;
    study.depth_limit = cfg.depth_limit;
    let records = run_study(&study)?;
    let path = cfg.output_path();
    write_convergence_csv(&records, study.dimension, &path)?;
    let mut report = String::new();
    for norm in study.applicable_norms() {
        match estimate_rate(&records, norm) {
            Ok(rate) => writeln!(report, "{norm}: slope {:.3} over n = {:?}", rate.slope, rate.window).unwrap(),
            Err(e) => writeln!(report, "{norm}: no rate ({e})").unwrap(),
        }
    }
    let flagged: Vec<usize> = records.iter().filter(|r| r.flagged()).map(|r| r.n).collect();
    if !flagged.is_empty() {
        writeln!(report, "refined, excluded from fits: n = {flagged:?}").unwrap();
    }
    writeln!(report, "wrote {}", path.display()).unwrap();
    Ok(report)
}
