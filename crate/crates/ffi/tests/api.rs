use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use ndkern_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ndk_last_error()) }.to_string_lossy().into_owned()
}

fn f64_array(data: &[f64], dims: &[usize]) -> *mut NdkArray {
    let mut out = ptr::null_mut();
    let st = unsafe { ndk_array_from_f64(data.as_ptr(), data.len(), dims.as_ptr(), dims.len(), &mut out) };
    assert_eq!(st, NdkStatus::Ok, "{}", last_error());
    out
}

fn values(a: *const NdkArray) -> Vec<f64> {
    let n = unsafe { ndk_array_count(a) };
    let mut v = vec![0.0; n];
    assert_eq!(unsafe { ndk_array_to_f64(a, v.as_mut_ptr(), n) }, NdkStatus::Ok);
    v
}

#[test]
fn create_inspect_free() {
    let a = f64_array(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0], &[4, 3]);
    unsafe {
        assert_eq!(ndk_array_ndim(a), 2);
        assert_eq!(ndk_array_elem_type(a), NdkElemType::Float64 as i32);
        let mut dims = [0usize; 2];
        assert_eq!(ndk_array_dims(a, dims.as_mut_ptr(), 2), NdkStatus::Ok);
        assert_eq!(dims, [4, 3]);
        let mut strides = [0isize; 2];
        assert_eq!(ndk_array_strides(a, strides.as_mut_ptr(), 2), NdkStatus::Ok);
        assert_eq!(strides, [24, 8]);
        assert_eq!(ndk_array_strides(a, strides.as_mut_ptr(), 1), NdkStatus::BufferTooSmall);
        ndk_array_free(a);
        ndk_array_free(ptr::null_mut());
    }
}

#[test]
fn status_codes_map_errors() {
    unsafe {
        let mut out = ptr::null_mut();
        let dims = [2usize, 2];
        let data = [1.0; 3];
        assert_eq!(ndk_array_from_f64(data.as_ptr(), 3, dims.as_ptr(), 2, &mut out), NdkStatus::Shape);
        assert!(out.is_null());
        assert_eq!(ndk_sum(ptr::null(), ptr::null(), 0, &mut out), NdkStatus::NullPointer);
        assert!(last_error().contains("null"));

        let a = f64_array(&[1.0, 2.0, 3.0], &[3]);
        let b = f64_array(&[1.0, 2.0], &[2]);
        assert_eq!(ndk_elementwise(NdkUfunc::Add, a, b, &mut out), NdkStatus::Broadcast);
        assert!(last_error().contains("(3,)"), "{}", last_error());
        let bad_axis = [5usize];
        assert_eq!(ndk_sum(a, bad_axis.as_ptr(), 1, &mut out), NdkStatus::Argument);
        assert_eq!(ndk_matmul(a, b, &mut out), NdkStatus::Shape);
        ndk_array_free(a);
        ndk_array_free(b);
    }
}

#[test]
fn arithmetic_through_handles() {
    unsafe {
        let x = f64_array(&[1.0, 2.0, 3.0], &[3]);
        let y = f64_array(&[10.0, 20.0], &[2, 1]);
        let mut z = ptr::null_mut();
        assert_eq!(ndk_elementwise(NdkUfunc::Add, x, y, &mut z), NdkStatus::Ok);
        let mut dims = [0usize; 2];
        ndk_array_dims(z, dims.as_mut_ptr(), 2);
        assert_eq!(dims, [2, 3]);
        assert_eq!(values(z), vec![11.0, 12.0, 13.0, 21.0, 22.0, 23.0]);

        let mut m = ptr::null_mut();
        assert_eq!(ndk_mean(z, ptr::null(), 0, &mut m), NdkStatus::Ok);
        assert_eq!(values(m), vec![17.0]);

        let mut t = ptr::null_mut();
        assert_eq!(ndk_transpose(z, ptr::null(), 0, &mut t), NdkStatus::Ok);
        let mut prod = ptr::null_mut();
        assert_eq!(ndk_matmul(z, t, &mut prod), NdkStatus::Ok);
        assert_eq!(values(prod), vec![434.0, 794.0, 794.0, 1454.0]);

        let mut neg = ptr::null_mut();
        assert_eq!(ndk_elementwise(NdkUfunc::Neg, x, ptr::null(), &mut neg), NdkStatus::Ok);
        assert_eq!(values(neg), vec![-1.0, -2.0, -3.0]);

        let new_dims = [3usize, 1];
        let mut r = ptr::null_mut();
        assert_eq!(ndk_reshape(x, new_dims.as_ptr(), 2, &mut r), NdkStatus::Ok);
        assert_eq!(ndk_array_ndim(r), 2);

        for p in [x, y, z, m, t, prod, neg, r] {
            ndk_array_free(p);
        }
    }
}

#[test]
fn save_load_and_generator() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("g.ndar").to_str().unwrap()).unwrap();
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(ndk_generator_new(7, &mut g), NdkStatus::Ok);
        let dims = [4usize, 5];
        let mut a = ptr::null_mut();
        assert_eq!(
            ndk_generator_sample(g, NdkDistribution::Integers, -3, 3, dims.as_ptr(), 2, &mut a),
            NdkStatus::Ok
        );
        assert_eq!(ndk_array_elem_type(a), NdkElemType::Int64 as i32);
        assert_eq!(ndk_save(a, path.as_ptr()), NdkStatus::Ok);
        let mut b = ptr::null_mut();
        assert_eq!(ndk_load(path.as_ptr(), &mut b), NdkStatus::Ok);
        let mut va = vec![0i64; 20];
        let mut vb = vec![0i64; 20];
        ndk_array_to_i64(a, va.as_mut_ptr(), 20);
        ndk_array_to_i64(b, vb.as_mut_ptr(), 20);
        assert_eq!(va, vb);
        assert!(va.iter().all(|v| (-3..3).contains(v)));

        assert_eq!(
            ndk_generator_sample(g, NdkDistribution::Integers, 3, 3, dims.as_ptr(), 2, &mut b),
            NdkStatus::Argument
        );

        let missing = CString::new(dir.path().join("nope.ndar").to_str().unwrap()).unwrap();
        assert_eq!(ndk_load(missing.as_ptr(), &mut b), NdkStatus::Io);
        std::fs::write(dir.path().join("bad.ndar"), b"XDAR\x01\x02\x00\x00").unwrap();
        let bad = CString::new(dir.path().join("bad.ndar").to_str().unwrap()).unwrap();
        assert_eq!(ndk_load(bad.as_ptr(), &mut b), NdkStatus::Format);
        assert!(last_error().contains("magic"));

        ndk_array_free(a);
        ndk_array_free(b);
        ndk_generator_free(g);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/ndkern.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exported: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exported.len() >= 20);
    for name in exported {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct NdkArray NdkArray;"));
}

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(|deps| deps.parent()).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_static_library() {
    let lib = target_dir().join("libndkern_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let manifest = env!("CARGO_MANIFEST_DIR");
    let status = Command::new("cc")
        .arg(format!("{manifest}/tests/c/smoke.c"))
        .arg(format!("-I{manifest}/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
