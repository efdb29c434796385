//! Exercises the C entry points from Rust, including error paths.

use std::ffi::{CStr, CString};
use std::ptr;

use spatnet_ffi::*;

fn last_error() -> String {
    unsafe {
        CStr::from_ptr(spatnet_last_error())
            .to_string_lossy()
            .into_owned()
    }
}

unsafe fn uniform_cloud(n: usize, dim: usize, seed: u64) -> *mut SpatnetCloud {
    let mut cloud: *mut SpatnetCloud = ptr::null_mut();
    assert_eq!(
        spatnet_cloud_uniform(n, dim, seed, &mut cloud),
        SpatnetStatus::Ok
    );
    assert!(!cloud.is_null());
    cloud
}

unsafe fn collect_edges(graph: *const SpatnetGraph) -> Vec<(usize, usize, f64)> {
    let count = spatnet_graph_edge_count(graph);
    let mut is = vec![0usize; count];
    let mut js = vec![0usize; count];
    let mut rs = vec![0f64; count];
    assert_eq!(
        spatnet_graph_edges(
            graph,
            is.as_mut_ptr(),
            js.as_mut_ptr(),
            rs.as_mut_ptr(),
            count
        ),
        SpatnetStatus::Ok
    );
    (0..count).map(|k| (is[k], js[k], rs[k])).collect()
}

#[test]
fn version_is_a_nonempty_semver_string() {
    let v = unsafe { CStr::from_ptr(spatnet_version()) }
        .to_str()
        .unwrap();
    assert!(!v.is_empty());
    assert!(v.split('.').count() >= 2, "unexpected version {v}");
}

#[test]
fn generated_header_declares_the_api() {
    let text = std::fs::read_to_string(env!("SPATNET_HEADER")).unwrap();
    assert!(text.contains("#ifndef SPATNET_H"));
    for sym in [
        "typedef enum SpatnetStatus",
        "typedef struct SpatnetCloud SpatnetCloud",
        "typedef struct SpatnetGraph SpatnetGraph",
        "spatnet_last_error",
        "spatnet_cloud_uniform",
        "spatnet_torus_distance",
        "spatnet_sample",
        "spatnet_graph_edges",
        "spatnet_graph_w1",
        "spatnet_gamma_lower_bound",
        "SPATNET_STATUS_RUN_FAILURE",
        "SPATNET_RUN_STATUS_EARLY_STOP",
    ] {
        assert!(text.contains(sym), "header is missing `{sym}`");
    }
}

#[test]
fn graphical_check_agrees_with_the_library() {
    unsafe {
        let yes = [3usize, 3, 3, 3];
        let no = [3usize, 3, 3, 1];
        assert_eq!(spatnet_is_graphical(yes.as_ptr(), yes.len()), 1);
        assert_eq!(spatnet_is_graphical(no.as_ptr(), no.len()), 0);
        assert_eq!(spatnet_is_graphical(ptr::null(), 4), -1);
        assert!(last_error().contains("NULL"));
    }
}

#[test]
fn cloud_accessors_and_from_coords() {
    unsafe {
        let cloud = uniform_cloud(17, 3, 5);
        assert_eq!(spatnet_cloud_n(cloud), 17);
        assert_eq!(spatnet_cloud_dim(cloud), 3);
        spatnet_cloud_free(cloud);

        let coords = [0.1, 0.9, 0.9, 0.1];
        let mut wrapped: *mut SpatnetCloud = ptr::null_mut();
        assert_eq!(
            spatnet_cloud_from_coords(coords.as_ptr(), 2, 2, &mut wrapped),
            SpatnetStatus::Ok
        );
        assert_eq!(spatnet_cloud_n(wrapped), 2);
        spatnet_cloud_free(wrapped);

        // Coordinates outside [0,1) are rejected.
        let bad = [0.2, 1.5];
        let mut out: *mut SpatnetCloud = ptr::null_mut();
        assert_eq!(
            spatnet_cloud_from_coords(bad.as_ptr(), 1, 2, &mut out),
            SpatnetStatus::InvalidArgument
        );
        assert!(out.is_null());

        // Free of NULL is a no-op.
        spatnet_cloud_free(ptr::null_mut());
        spatnet_graph_free(ptr::null_mut());
    }
}

#[test]
fn torus_distance_wraps_around() {
    unsafe {
        let x = [0.1, 0.9];
        let y = [0.9, 0.1];
        let mut d = 0.0;
        assert_eq!(
            spatnet_torus_distance(x.as_ptr(), y.as_ptr(), 2, &mut d),
            SpatnetStatus::Ok
        );
        assert!((d - 0.08f64.sqrt()).abs() < 1e-12);
        assert_eq!(
            spatnet_torus_distance(ptr::null(), y.as_ptr(), 2, &mut d),
            SpatnetStatus::NullPointer
        );
    }
}

#[test]
fn sample_run_is_deterministic_and_complete() {
    unsafe {
        let n = 40;
        let cloud = uniform_cloud(n, 2, 21);
        let degrees = vec![3usize; n];
        let target = CString::new("normal:mu=0.2,sigma=0.05").unwrap();

        let mut graphs = Vec::new();
        for _ in 0..2 {
            let mut graph: *mut SpatnetGraph = ptr::null_mut();
            let st = spatnet_sample(
                cloud,
                degrees.as_ptr(),
                n,
                target.as_ptr(),
                ptr::null(),
                1.0,
                77,
                false,
                &mut graph,
            );
            assert_eq!(st, SpatnetStatus::Ok);
            graphs.push(graph);
        }

        let g = graphs[0];
        assert_eq!(spatnet_graph_n(g), n);
        assert_eq!(spatnet_graph_m(g), 60);
        assert_eq!(spatnet_graph_edge_count(g), 60);
        assert_eq!(spatnet_graph_gamma(g), 1.0);
        assert_eq!(spatnet_graph_seed(g), 77);
        let mut rs = SpatnetRunStatus::Failure;
        assert_eq!(spatnet_graph_status(g, &mut rs), SpatnetStatus::Ok);
        assert_eq!(rs, SpatnetRunStatus::Complete);

        let a = collect_edges(graphs[0]);
        let b = collect_edges(graphs[1]);
        assert_eq!(a, b, "same cloud and seed must reproduce the edge list");

        // Simple graph with the requested regular degrees, zero-based endpoints.
        let mut deg = vec![0usize; n];
        let mut seen = std::collections::HashSet::new();
        for &(i, j, r) in &a {
            assert!(i < j && j < n);
            assert!(r > 0.0 && r <= 0.5f64.sqrt() * 2.0f64.sqrt());
            assert!(seen.insert((i, j)), "duplicate edge ({i},{j})");
            deg[i] += 1;
            deg[j] += 1;
        }
        assert!(deg.iter().all(|&d| d == 3));

        let mut w1 = f64::NAN;
        assert_eq!(
            spatnet_graph_w1(graphs[0], target.as_ptr(), &mut w1),
            SpatnetStatus::Ok
        );
        assert!(w1.is_finite() && (0.0..0.5).contains(&w1), "w1 = {w1}");

        for g in graphs {
            spatnet_graph_free(g);
        }
        spatnet_cloud_free(cloud);
    }
}

#[test]
fn gamma_below_one_stops_early() {
    unsafe {
        let n = 40;
        let cloud = uniform_cloud(n, 2, 21);
        let degrees = vec![3usize; n];
        let target = CString::new("normal:mu=0.2,sigma=0.05").unwrap();
        let mut graph: *mut SpatnetGraph = ptr::null_mut();
        assert_eq!(
            spatnet_sample(
                cloud,
                degrees.as_ptr(),
                n,
                target.as_ptr(),
                ptr::null(),
                0.5,
                77,
                false,
                &mut graph,
            ),
            SpatnetStatus::Ok
        );
        assert_eq!(spatnet_graph_edge_count(graph), 30);
        let mut rs = SpatnetRunStatus::Complete;
        assert_eq!(spatnet_graph_status(graph, &mut rs), SpatnetStatus::Ok);
        assert_eq!(rs, SpatnetRunStatus::EarlyStop);
        spatnet_graph_free(graph);
        spatnet_cloud_free(cloud);
    }
}

#[test]
fn strict_stall_reports_failure_with_partial_graph() {
    unsafe {
        let n = 30;
        let cloud = uniform_cloud(n, 2, 3);
        let degrees = vec![3usize; n];
        // No torus distance in dimension 2 exceeds sqrt(2)/2, so this target
        // leaves the sampler without admissible pairs immediately.
        let target = CString::new("uniform:a=0.8,b=0.9").unwrap();
        let mut graph: *mut SpatnetGraph = ptr::null_mut();
        let st = spatnet_sample(
            cloud,
            degrees.as_ptr(),
            n,
            target.as_ptr(),
            ptr::null(),
            1.0,
            9,
            true,
            &mut graph,
        );
        assert_eq!(st, SpatnetStatus::RunFailure);
        assert!(!graph.is_null(), "partial graph must still be returned");
        assert!(last_error().contains("stalled"));
        let mut rs = SpatnetRunStatus::Complete;
        assert_eq!(spatnet_graph_status(graph, &mut rs), SpatnetStatus::Ok);
        assert_eq!(rs, SpatnetRunStatus::Failure);
        assert_eq!(spatnet_graph_edge_count(graph), 0);
        spatnet_graph_free(graph);
        spatnet_cloud_free(cloud);
    }
}

#[test]
fn invalid_inputs_set_readable_errors() {
    unsafe {
        let n = 4;
        let cloud = uniform_cloud(n, 2, 1);
        let target = CString::new("normal:mu=0.2,sigma=0.05").unwrap();
        let mut graph: *mut SpatnetGraph = ptr::null_mut();

        let bad_degrees = [3usize, 3, 3, 1];
        assert_eq!(
            spatnet_sample(
                cloud,
                bad_degrees.as_ptr(),
                n,
                target.as_ptr(),
                ptr::null(),
                1.0,
                1,
                false,
                &mut graph,
            ),
            SpatnetStatus::InvalidArgument
        );
        assert!(last_error().contains("not graphical"), "{}", last_error());
        assert!(graph.is_null());

        let short = [3usize, 3];
        assert_eq!(
            spatnet_sample(
                cloud,
                short.as_ptr(),
                2,
                target.as_ptr(),
                ptr::null(),
                1.0,
                1,
                false,
                &mut graph,
            ),
            SpatnetStatus::InvalidArgument
        );
        assert!(last_error().contains("2 entries"), "{}", last_error());

        let degrees = [1usize, 1, 1, 1];
        let bad_spec = CString::new("pareto:alpha=2").unwrap();
        assert_eq!(
            spatnet_sample(
                cloud,
                degrees.as_ptr(),
                n,
                bad_spec.as_ptr(),
                ptr::null(),
                1.0,
                1,
                false,
                &mut graph,
            ),
            SpatnetStatus::InvalidArgument
        );
        assert!(!last_error().is_empty());

        let missing_hist = CString::new("hist:/no/such/file.csv").unwrap();
        assert_eq!(
            spatnet_sample(
                cloud,
                degrees.as_ptr(),
                n,
                missing_hist.as_ptr(),
                ptr::null(),
                1.0,
                1,
                false,
                &mut graph,
            ),
            SpatnetStatus::InvalidArgument
        );

        let not_utf8 = [0xffu8, 0x00];
        assert_eq!(
            spatnet_sample(
                cloud,
                degrees.as_ptr(),
                n,
                not_utf8.as_ptr().cast(),
                ptr::null(),
                1.0,
                1,
                false,
                &mut graph,
            ),
            SpatnetStatus::InvalidArgument
        );
        assert!(last_error().contains("UTF-8"));

        assert_eq!(
            spatnet_sample(
                ptr::null(),
                degrees.as_ptr(),
                n,
                target.as_ptr(),
                ptr::null(),
                1.0,
                1,
                false,
                &mut graph,
            ),
            SpatnetStatus::NullPointer
        );
        assert_eq!(
            spatnet_sample(
                cloud,
                degrees.as_ptr(),
                n,
                target.as_ptr(),
                ptr::null(),
                1.0,
                1,
                false,
                ptr::null_mut(),
            ),
            SpatnetStatus::NullPointer
        );

        spatnet_cloud_free(cloud);
    }
}

#[test]
fn edge_copy_rejects_small_capacity() {
    unsafe {
        let n = 20;
        let cloud = uniform_cloud(n, 2, 8);
        let degrees = vec![2usize; n];
        let target = CString::new("normal:mu=0.2,sigma=0.05").unwrap();
        let mut graph: *mut SpatnetGraph = ptr::null_mut();
        assert_eq!(
            spatnet_sample(
                cloud,
                degrees.as_ptr(),
                n,
                target.as_ptr(),
                ptr::null(),
                1.0,
                4,
                false,
                &mut graph,
            ),
            SpatnetStatus::Ok
        );
        let count = spatnet_graph_edge_count(graph);
        assert!(count > 1);
        let mut is = vec![0usize; count - 1];
        let mut js = vec![0usize; count - 1];
        let mut rs = vec![0f64; count - 1];
        assert_eq!(
            spatnet_graph_edges(
                graph,
                is.as_mut_ptr(),
                js.as_mut_ptr(),
                rs.as_mut_ptr(),
                count - 1,
            ),
            SpatnetStatus::InvalidArgument
        );
        assert!(last_error().contains("capacity"));
        spatnet_graph_free(graph);
        spatnet_cloud_free(cloud);
    }
}

#[test]
fn explicit_reference_specs_are_honoured() {
    unsafe {
        let n = 24;
        let cloud = uniform_cloud(n, 2, 12);
        let degrees = vec![2usize; n];
        let target = CString::new("normal:mu=0.2,sigma=0.05").unwrap();
        for spec in ["torus-analytic", "auto"] {
            let reference = CString::new(spec).unwrap();
            let mut graph: *mut SpatnetGraph = ptr::null_mut();
            assert_eq!(
                spatnet_sample(
                    cloud,
                    degrees.as_ptr(),
                    n,
                    target.as_ptr(),
                    reference.as_ptr(),
                    1.0,
                    4,
                    false,
                    &mut graph,
                ),
                SpatnetStatus::Ok,
                "reference {spec}"
            );
            assert_eq!(spatnet_graph_edge_count(graph), n);
            spatnet_graph_free(graph);
        }
        spatnet_cloud_free(cloud);
    }
}

#[test]
fn gamma_bound_matches_the_core_library() {
    unsafe {
        let mut g = f64::NAN;
        assert_eq!(
            spatnet_gamma_lower_bound(1.0, 3, 3.0, 1.0, 1.0, &mut g),
            SpatnetStatus::Ok
        );
        let inputs = spatnet::experiments::GammaBoundInputs::new(1.0, 3, 3.0);
        let expected = spatnet::experiments::gamma_lower_bound(&inputs).unwrap();
        assert!((g - expected).abs() < 1e-12);
        assert!((g - 0.69).abs() < 0.01);

        assert_eq!(
            spatnet_gamma_lower_bound(0.0, 3, 3.0, 1.0, 1.0, &mut g),
            SpatnetStatus::InvalidArgument
        );
        assert!(!last_error().is_empty());

        let c = spatnet_degree_corrected_c(3, 60);
        assert!((c - (1.0 - 9.0 / 240.0)).abs() < 1e-15);
    }
}
