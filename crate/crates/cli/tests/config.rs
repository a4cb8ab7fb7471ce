use std::io::Write;
use std::path::PathBuf;

use cutmesh::convergence_harness::StudyKind;
use cutmesh::reconstruction::{Direction2D, GradientMode, Reconstruction2D, SearchVariant};
use cutmesh_cli::{parse_config, Command, Flags, LevelSetName, RunConfig};

fn config_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn empty_config_gives_defaults() {
    let cfg = RunConfig::from_toml_str("").unwrap();
    assert_eq!(cfg, RunConfig::default());
    assert_eq!(cfg.variant, "13".parse::<SearchVariant>().unwrap());
    assert_eq!(cfg.variant, "A13".parse::<SearchVariant>().unwrap());
    assert_eq!(cfg.quad_order, 11);
    assert_eq!(cfg.depth_limit, 5);
}

#[test]
fn variant_24b() {
    let cfg = RunConfig::from_toml_str("variant = \"24b\"").unwrap();
    assert_eq!(cfg.variant.reconstruction, Reconstruction2D::Hermite);
    assert_eq!(cfg.variant.direction, Direction2D::Gradient(GradientMode::Live));
}

#[test]
fn variant_99_is_rejected() {
    let err = RunConfig::from_toml_str("variant = \"99\"").unwrap_err();
    assert_eq!(err.key, "variant");
}

#[test]
fn unknown_key_names_the_key() {
    let err = RunConfig::from_toml_str("order = 2\ncolour = \"red\"").unwrap_err();
    assert_eq!(err.key, "colour");
    assert!(err.message.contains("unknown key"));
}

#[test]
fn bad_values_name_their_key() {
    for (text, key) in [
        ("levelset = \"torus\"", "levelset"),
        ("study = \"surface\"", "study"),
        ("command = \"mesh\"", "command"),
        ("order = \"two\"", "order"),
        ("order = -1", "order"),
        ("order = 0", "order"),
        ("resolutions = [6, 4]", "resolutions"),
        ("resolutions = [6, \"x\"]", "resolutions[1]"),
        ("quad_order = 40", "quad_order"),
        ("export_density = 0", "export_density"),
        ("order = ", "config"),
    ] {
        let err = RunConfig::from_toml_str(text).unwrap_err();
        assert_eq!(err.key, key, "{text}");
    }
}

#[test]
fn unreadable_file_is_a_configuration_error() {
    let flags = Flags {
        config: Some(PathBuf::from("/definitely/not/here.toml")),
        ..Default::default()
    };
    assert_eq!(parse_config(Command::Decompose, &flags).unwrap_err().key, "config");
}

#[test]
fn flags_override_file() {
    let file = config_file("levelset = \"sphere\"\norder = 0\nn = 8\nvariant = \"B24a\"\nstudy = \"volume\"\n");
    let flags = Flags {
        config: Some(file.path().to_path_buf()),
        order: Some(3),
        variant: Some("C13".into()),
        ..Default::default()
    };
    let cfg = parse_config(Command::ExportMesh, &flags).unwrap();
    assert_eq!(cfg.command, Command::ExportMesh);
    assert_eq!(cfg.level_set, LevelSetName::Sphere);
    assert_eq!(cfg.order, 3);
    assert_eq!(cfg.n, 8);
    assert_eq!(cfg.variant, "C13".parse().unwrap());
    assert_eq!(cfg.study, StudyKind::Volume);
}

#[test]
fn invalid_flag_is_rejected() {
    let flags = Flags {
        levelset: Some("cube".into()),
        ..Default::default()
    };
    assert_eq!(parse_config(Command::Reconstruct, &flags).unwrap_err().key, "levelset");
}

#[test]
fn defaults_round_trip() {
    let d = RunConfig::default();
    assert_eq!(RunConfig::from_toml_str(&d.to_toml()).unwrap(), d);
}

#[test]
fn full_config_round_trips() {
    let cfg = RunConfig {
        command: Command::Reconstruct,
        level_set: LevelSetName::Bumpy,
        order: 4,
        n: 12,
        resolutions: Some(vec![6, 10, 14]),
        variant: "B24b".parse().unwrap(),
        quad_order: 9,
        depth_limit: 2,
        study: StudyKind::Volume,
        out: Some(PathBuf::from("out/bumpy.vtk")),
        export_density: 3,
    };
    assert_eq!(RunConfig::from_toml_str(&cfg.to_toml()).unwrap(), cfg);
}
