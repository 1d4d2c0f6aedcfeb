use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use drumhead_rom_ffi::*;

fn last_error() -> String {
    let p = dr_last_error_message();
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { dr_string_free(p) };
    s
}

#[test]
fn modes_round_trip() {
    unsafe {
        let mut wg = ptr::null_mut();
        assert_eq!(dr_waveguide_new(8, 0.05, 11, &mut wg), DrStatus::Ok);
        assert_eq!(dr_waveguide_cells(wg), 8);
        let mut h = [0.0; 8];
        assert_eq!(dr_waveguide_thickness(wg, h.as_mut_ptr(), h.len()), DrStatus::Ok);
        assert!(h.iter().all(|&x| (x - 1.0).abs() <= 0.025));

        let mut m = ptr::null_mut();
        assert_eq!(dr_modes_solve(wg, 385.0, &mut m), DrStatus::Ok);
        let count = dr_modes_count(m);
        assert_eq!(count, 16);
        let mut f = vec![0.0; count];
        let mut pr = vec![0.0; count];
        assert_eq!(dr_modes_frequencies(m, f.as_mut_ptr(), count), DrStatus::Ok);
        assert_eq!(dr_modes_participation(m, pr.as_mut_ptr(), count), DrStatus::Ok);
        assert!(f.windows(2).all(|w| w[0] <= w[1]));
        assert!(pr.iter().all(|&p| (1.0..=8.0 + 1e-9).contains(&p)));
        assert!(matches!(dr_modes_is_extended(m, 1), 0 | 1));
        assert_eq!(dr_modes_is_extended(m, 0), -1);
        assert_eq!(dr_modes_is_extended(m, 17), -1);

        let mut shape = vec![0.0; count];
        assert_eq!(dr_modes_shape(m, 3, shape.as_mut_ptr(), count), DrStatus::Ok);
        assert!(shape.iter().any(|&x| x != 0.0));
        let (mut u, mut lt) = ([0.0; 8], [0.0; 8]);
        assert_eq!(dr_modes_equilibrium(m, u.as_mut_ptr(), lt.as_mut_ptr(), 8), DrStatus::Ok);
        assert!(u.iter().all(|&x| x * u[0] > 0.0), "{u:?}");

        dr_modes_free(m);
        dr_waveguide_free(wg);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let mut wg = ptr::null_mut();
        assert_eq!(dr_waveguide_new(1, 0.05, 0, &mut wg), DrStatus::InvalidInput);
        assert!(wg.is_null());
        assert!(last_error().contains("N = 1"));

        assert_eq!(dr_waveguide_new(4, 0.0, 0, ptr::null_mut()), DrStatus::NullPointer);
        assert_eq!(dr_modes_solve(ptr::null(), 380.0, &mut ptr::null_mut()), DrStatus::NullPointer);

        assert_eq!(dr_waveguide_new(4, 0.0, 0, &mut wg), DrStatus::Ok);
        let mut m = ptr::null_mut();
        assert_eq!(dr_modes_solve(wg, 380.0, &mut m), DrStatus::Ok);
        let mut small = [0.0; 3];
        assert_eq!(dr_modes_frequencies(m, small.as_mut_ptr(), small.len()), DrStatus::BufferTooSmall);
        assert!(last_error().contains("need 8"));
        let mut shape = [0.0; 8];
        assert_eq!(dr_modes_shape(m, 9, shape.as_mut_ptr(), 8), DrStatus::InvalidInput);

        let mut f = [0.0; 8];
        assert_eq!(dr_modes_frequencies(m, f.as_mut_ptr(), f.len()), DrStatus::Ok);
        assert!(dr_last_error_message().is_null());

        dr_modes_free(m);
        dr_waveguide_free(wg);
        dr_waveguide_free(ptr::null_mut());
        dr_modes_free(ptr::null_mut());
    }
}

#[test]
fn reference_cell_queries() {
    unsafe {
        let mut t_star = 0.0;
        assert_eq!(dr_critical_temperature(&mut t_star), DrStatus::Ok);
        assert!(t_star > 350.0 && t_star < 400.0);
        let mut e = DrBandEdges::default();
        assert_eq!(dr_band_edges(380.0, &mut e), DrStatus::Ok);
        assert!(e.band1_min < e.band1_max && e.band1_max < e.band2_min && e.band2_min < e.band2_max);
        assert_eq!(dr_band_edges(380.0, ptr::null_mut()), DrStatus::NullPointer);
    }
    let v = unsafe { CStr::from_ptr(dr_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/drumhead_rom.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["dr_waveguide_new", "dr_modes_solve", "dr_modes_shape", "dr_band_edges", "DR_STATUS_BUFFER_TOO_SMALL"] {
        assert!(text.contains(name), "{name}");
    }
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .status()
        .expect("C compiler available");
    assert!(status.success());
}
