use std::ffi::{CStr, CString};
use std::ptr;

use modlab_ffi::*;

fn grid(dim: usize, side: usize) -> *mut ModlabGraph {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { modlab_graph_grid(dim, side, 1.0, &mut g) }, ModlabStatus::Ok);
    assert!(!g.is_null());
    g
}

fn last_error() -> String {
    let p = modlab_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn grid_handle_counts_and_distance() {
    let g = grid(2, 5);
    unsafe {
        assert_eq!(modlab_graph_node_count(g), 25);
        assert_eq!(modlab_graph_edge_count(g), 40);
        let mut d = 0.0;
        assert_eq!(modlab_graph_distance(g, 0, 24, &mut d), ModlabStatus::Ok);
        assert_eq!(d, 8.0);
        assert_eq!(modlab_graph_distance(g, 0, 99, &mut d), ModlabStatus::InvalidArgument);
        assert!(last_error().contains("99"));
        modlab_graph_free(g);
        modlab_graph_free(ptr::null_mut());
        assert_eq!(modlab_graph_node_count(ptr::null()), 0);
    }
}

#[test]
fn modulus_of_series_path_from_text() {
    let text = CString::new("nodes 3 edges 2 dim 0\nnode 0\nnode 1\nnode 2\nedge 0 1 1 1\nedge 1 2 1 1\n").unwrap();
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(modlab_graph_from_text(text.as_ptr(), &mut g), ModlabStatus::Ok);
        let (e, f) = ([0usize], [2usize]);
        let mut s = ModlabModulusSummary::default();
        let mut rho = [0.0; 2];
        let st = modlab_compute_modulus(
            g,
            e.as_ptr(),
            1,
            f.as_ptr(),
            1,
            ptr::null(),
            0,
            2.0,
            1e-8,
            1000,
            &mut s,
            rho.as_mut_ptr(),
            2,
        );
        assert_eq!(st, ModlabStatus::Ok);
        assert!((s.value - 0.5).abs() < 1e-6);
        assert_eq!(s.converged, 1);
        assert_eq!(s.vacuous, 0);
        assert!((rho[0] - 0.5).abs() < 1e-6 && (rho[1] - 0.5).abs() < 1e-6);

        let st = modlab_compute_modulus(
            g,
            e.as_ptr(),
            1,
            f.as_ptr(),
            1,
            ptr::null(),
            0,
            2.0,
            1e-8,
            1000,
            &mut s,
            rho.as_mut_ptr(),
            5,
        );
        assert_eq!(st, ModlabStatus::InvalidArgument);
        modlab_graph_free(g);
    }
}

#[test]
fn error_codes() {
    let mut g = ptr::null_mut();
    unsafe {
        let bad = CString::new("nodes 2 edges 1 dim 0\nedge 0 5 1 1\n").unwrap();
        assert_ne!(modlab_graph_from_text(bad.as_ptr(), &mut g), ModlabStatus::Ok);
        assert!(g.is_null());
        let path = CString::new("/nonexistent/graph.txt").unwrap();
        assert_eq!(modlab_graph_load(path.as_ptr(), &mut g), ModlabStatus::Io);
        assert_eq!(modlab_graph_from_text(ptr::null(), &mut g), ModlabStatus::NullPointer);
        assert_eq!(modlab_graph_grid(2, 3, 1.0, ptr::null_mut()), ModlabStatus::NullPointer);
        let mut d = 0.0;
        assert_eq!(modlab_graph_distance(ptr::null(), 0, 0, &mut d), ModlabStatus::NullPointer);
    }
}

#[test]
fn ahlfors_poincare_porosity() {
    let g = grid(2, 41);
    unsafe {
        let samples = [820usize];
        let mut a = ModlabAhlforsSummary::default();
        assert_eq!(modlab_ahlfors_fit(g, samples.as_ptr(), 1, 2.0, 10.0, 6, &mut a), ModlabStatus::Ok);
        assert!((a.q_hat - 2.0).abs() < 0.2, "q_hat {}", a.q_hat);
        assert!(a.c_hat >= 1.0);

        let u: Vec<f64> = (0..1681).map(|v| (v % 41) as f64).collect();
        let mut ratio = 0.0;
        let st = modlab_poincare_ratio(g, 820, 4.0, u.as_ptr(), u.len(), ptr::null(), 2.0, 2.0, &mut ratio);
        assert_eq!(st, ModlabStatus::Ok);
        assert!(ratio > 0.0 && ratio.is_finite());
        modlab_graph_free(g);
    }

    let pts = [0.0, 1.0];
    let x = [0.0];
    let scales = [0.1, 0.6];
    let mut passed = [9u8; 2];
    let st = unsafe {
        modlab_porosity_check(pts.as_ptr(), 2, 1, x.as_ptr(), 2.0, scales.as_ptr(), 2, passed.as_mut_ptr())
    };
    assert_eq!(st, ModlabStatus::Ok);
    assert_eq!(passed, [1, 0]);
    let st = unsafe {
        modlab_porosity_check(pts.as_ptr(), 2, 1, x.as_ptr(), 0.5, scales.as_ptr(), 2, passed.as_mut_ptr())
    };
    assert_eq!(st, ModlabStatus::InvalidArgument);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(modlab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = include_str!("../include/modlab.h");
    for sym in [
        "typedef struct ModlabGraph ModlabGraph;",
        "MODLAB_STATUS_OK = 0",
        "MODLAB_STATUS_PANIC",
        "ModlabModulusSummary",
        "ModlabAhlforsSummary",
        "modlab_graph_grid",
        "modlab_graph_load",
        "modlab_graph_from_text",
        "modlab_graph_free",
        "modlab_compute_modulus",
        "modlab_ahlfors_fit",
        "modlab_porosity_check",
        "modlab_poincare_ratio",
        "modlab_last_error",
    ] {
        assert!(header.contains(sym), "header lacks {sym}");
    }
}
