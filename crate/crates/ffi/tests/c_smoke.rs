//! Compiles a C program against the generated header and the static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "periodlab.h"

int main(void) {
    PlClassGroup *g = NULL;
    if (pl_classgroup_new(-1028, false, &g) != PlStatus_Ok) return 10;
    int64_t d = 0;
    if (pl_classgroup_invariant(g, 0, &d) != PlStatus_Ok || d != 16) return 11;
    pl_classgroup_free(g);
    if (pl_classgroup_new(-9, false, &g) != PlStatus_InvalidArgument) return 12;
    char msg[128];
    if (pl_last_error(msg, sizeof msg) == 0) return 13;

    int64_t a[5] = {0, 0, 0, -1, 0};
    PlCurve *c = NULL;
    if (pl_curve_new(a, &c) != PlStatus_Ok) return 20;
    int64_t ap = 0;
    if (pl_curve_trace(c, 3, &ap) != PlStatus_Ok || ap != 0) return 21;
    pl_curve_free(c);

    char *json = NULL;
    if (pl_example_257_json(&json) != PlStatus_Ok) return 30;
    if (strstr(json, "\"passed\":true") == NULL) return 31;
    pl_string_free(json);
    puts("ok");
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<this test> -> target/<profile>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let mut build = Command::new(env!("CARGO"));
    build.args(["build", "-p", "periodlab-ffi", "--lib"]);
    if profile_dir.file_name().is_some_and(|n| n == "release") {
        build.arg("--release");
    }
    assert!(build.status().unwrap().success());
    let lib = profile_dir.join("libperiodlab_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let exe = dir.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("cc available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
