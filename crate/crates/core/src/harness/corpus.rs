//! Embedded benchmark corpus: golden sources, security configurations,
//! directed vector sets, and campaign recipes for the five fixtures.

/// Fixture names in report order.
pub const FIXTURE_NAMES: [&str; 5] = ["arbiter", "mem", "gng", "aes", "usb_lite"];

pub const ARBITER_V: &str = include_str!("../../fixtures/arbiter/golden.v");
pub const MEM_V: &str = include_str!("../../fixtures/mem/golden.v");
pub const GNG_V: &str = include_str!("../../fixtures/gng/golden.v");
pub const AES_V: &str = include_str!("../../fixtures/aes/golden.v");
pub const USB_LITE_V: &str = include_str!("../../fixtures/usb_lite/golden.v");

pub fn golden_source(fixture: &str) -> Option<(&'static str, &'static str, &'static str)> {
    // (source text, origin name, top module)
    match fixture {
        "arbiter" => Some((ARBITER_V, "arbiter/golden.v", "arb2")),
        "mem" => Some((MEM_V, "mem/golden.v", "mem")),
        "gng" => Some((GNG_V, "gng/golden.v", "gng_interp")),
        "aes" => Some((AES_V, "aes/golden.v", "S4")),
        "usb_lite" => Some((USB_LITE_V, "usb_lite/golden.v", "usb_pid")),
        _ => None,
    }
}

pub const ARBITER_CFG: &str = include_str!("../../fixtures/arbiter/config.cfg");
pub const MEM_CFG: &str = include_str!("../../fixtures/mem/config.cfg");
pub const GNG_CFG: &str = include_str!("../../fixtures/gng/config.cfg");
pub const AES_CFG: &str = include_str!("../../fixtures/aes/config.cfg");
pub const USB_LITE_CFG: &str = include_str!("../../fixtures/usb_lite/config.cfg");

pub fn config_text(fixture: &str) -> Option<&'static str> {
    match fixture {
        "arbiter" => Some(ARBITER_CFG),
        "mem" => Some(MEM_CFG),
        "gng" => Some(GNG_CFG),
        "aes" => Some(AES_CFG),
        "usb_lite" => Some(USB_LITE_CFG),
        _ => None,
    }
}

pub const ARBITER_DIRECTED: &str = include_str!("../../fixtures/arbiter/vectors/directed.vec");
pub const MEM_PRIVILEGE_VEC: &str = include_str!("../../fixtures/mem/vectors/privilege.vec");
pub const MEM_LEAK_VEC: &str = include_str!("../../fixtures/mem/vectors/leak.vec");
pub const MEM_OOB_VEC: &str = include_str!("../../fixtures/mem/vectors/oob.vec");
pub const AES_JTAG_VEC: &str = include_str!("../../fixtures/aes/vectors/jtag.vec");
pub const AES_TRIGGERS_VEC: &str = include_str!("../../fixtures/aes/vectors/triggers.vec");
pub const USB_FAMILIES_VEC: &str = include_str!("../../fixtures/usb_lite/vectors/families.vec");
pub const USB_FSM_VEC: &str = include_str!("../../fixtures/usb_lite/vectors/fsm.vec");

/// The ten directed tests that force the high product bit.
pub const GNG_TRIGGERS: [&str; 10] = [
    include_str!("../../fixtures/gng/vectors/trigger0.vec"),
    include_str!("../../fixtures/gng/vectors/trigger1.vec"),
    include_str!("../../fixtures/gng/vectors/trigger2.vec"),
    include_str!("../../fixtures/gng/vectors/trigger3.vec"),
    include_str!("../../fixtures/gng/vectors/trigger4.vec"),
    include_str!("../../fixtures/gng/vectors/trigger5.vec"),
    include_str!("../../fixtures/gng/vectors/trigger6.vec"),
    include_str!("../../fixtures/gng/vectors/trigger7.vec"),
    include_str!("../../fixtures/gng/vectors/trigger8.vec"),
    include_str!("../../fixtures/gng/vectors/trigger9.vec"),
];
