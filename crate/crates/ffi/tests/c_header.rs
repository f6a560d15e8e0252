// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Compiles a C program against the generated header and links it with the
//! static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "povmsim.h"

int main(void) {
    PovmsimPovm *p = NULL;
    if (povmsim_povm_from_fixture("tetrahedral", &p) != POVMSIM_STATUS_OK) return 10;
    double zero[4] = {1.0, 0.0, 0.0, 0.0};
    double probs[4];
    if (povmsim_born_probabilities(p, zero, 2, probs, 4) != POVMSIM_STATUS_OK) return 11;
    if (probs[0] < 0.4999 || probs[0] > 0.5001) return 12;
    PovmsimPovm *q = NULL;
    if (povmsim_povm_from_fixture("bogus", &q) != POVMSIM_STATUS_INVALID_ARGUMENT) return 13;
    if (povmsim_last_error()[0] == '\0') return 14;
    povmsim_povm_free(p);
    printf("ok %s\n", povmsim_version());
    return 0;
}
"#;

fn compiler() -> String {
    std::env::var("CC").unwrap_or_else(|_| "cc".into())
}

fn include_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(compiler())
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(include_dir())
        .arg(&src)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let cpp = dir.path().join("main.cpp");
    std::fs::write(&cpp, PROGRAM).unwrap();
    let status = Command::new("c++")
        .args(["-fsyntax-only", "-I"])
        .arg(include_dir())
        .arg(&cpp)
        .status()
        .expect("C++ compiler available");
    assert!(status.success());
}

#[test]
fn c_program_links_and_runs() {
    // the test binary lives in target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libpovmsim_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let bin = dir.path().join("main");
    let status = Command::new(compiler())
        .args(["-std=c99", "-I"])
        .arg(include_dir())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
