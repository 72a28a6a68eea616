//! Compiles and runs a small C program against the generated header and the
//! static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "expdg.h"

int main(void) {
    ExpdgSimulation *sim = NULL;
    if (expdg_simulation_from_preset("landau", &sim) != EXPDG_STATUS_OK) return 10;
    if (expdg_simulation_step(sim, 3) != EXPDG_STATUS_OK) return 11;
    ExpdgDiagnostics d;
    if (expdg_simulation_diagnostics(sim, &d) != EXPDG_STATUS_OK) return 12;
    expdg_simulation_free(sim);
    if (d.steps != 3 || !(d.time > 0.0) || !(d.mass > 0.0)) return 13;

    if (expdg_simulation_from_preset("nope", &sim) != EXPDG_STATUS_CONFIG) return 14;
    char msg[512];
    size_t needed = 0;
    if (expdg_last_error_message(msg, sizeof msg, &needed) != EXPDG_STATUS_OK) return 15;
    if (strstr(msg, "nope") == NULL || needed != strlen(msg) + 1) return 16;

    size_t dim = 0;
    double a[16];
    if (expdg_advection_matrix(2, 1, 1.0, EXPDG_FLUX_CENTRAL, a, 16, &dim) != EXPDG_STATUS_OK) return 17;
    if (dim != 4) return 18;
    printf("%s ok\n", expdg_version());
    return 0;
}
"#;

fn compiler() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok().map(|_| cc)
}

fn static_lib() -> PathBuf {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent()
        .unwrap()
        .parent()
        .unwrap()
        .join("libexpdg_ffi.a")
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let lib = static_lib();
    assert!(lib.exists(), "missing {}", lib.display());
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let out = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Wextra", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "compile failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let text = String::from_utf8(run.stdout).unwrap();
    assert_eq!(text.trim(), format!("{} ok", env!("CARGO_PKG_VERSION")));
}

#[test]
fn header_declares_the_whole_api() {
    let h = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/expdg.h"))
        .unwrap();
    for name in [
        "expdg_simulation_from_preset",
        "expdg_simulation_from_toml",
        "expdg_simulation_step",
        "expdg_simulation_time",
        "expdg_simulation_diagnostics",
        "expdg_simulation_free",
        "expdg_advection_matrix",
        "expdg_last_error_message",
        "expdg_version",
        "EXPDG_STATUS_PANIC = 6",
        "typedef struct ExpdgSimulation ExpdgSimulation;",
    ] {
        assert!(h.contains(name), "{name}");
    }
}
