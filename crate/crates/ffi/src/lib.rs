//! C ABI over `wbnsim`.
//!
//! Conventions:
//! - Every fallible function returns a [`WbnStatus`]; on failure
//!   [`wbn_last_error`] describes the cause for the calling thread.
//! - Results come back through out-pointers, which must be non-null.
//! - Handles ([`WbnDeployment`], [`WbnTable`]) are opaque, created by this
//!   library and released with their `_free` function. Strings returned as
//!   `char *` are released with [`wbn_string_free`].
//! - Panics never cross the boundary; they surface as `WBN_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use wbnsim::analytics::{self, AnalyticsError};
use wbnsim::config::{parse_config, ConfigSources};
use wbnsim::consensus::{self, ConsensusConfig, ConsensusError, Mechanism};
use wbnsim::csv_out;
use wbnsim::experiments::{self, SweepTable};
use wbnsim::radio::{self, ChannelParams, Deployment, Jammer, Point, RadioError};
use wbnsim::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WbnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Consensus = 4,
    Infeasible = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WbnMechanism {
    Pbft = 0,
    Raft = 1,
    Pow = 2,
}

impl From<WbnMechanism> for Mechanism {
    fn from(m: WbnMechanism) -> Self {
        match m {
            WbnMechanism::Pbft => Mechanism::Pbft,
            WbnMechanism::Raft => Mechanism::Raft,
            WbnMechanism::Pow => Mechanism::Pow,
        }
    }
}

/// Log-distance channel and detection thresholds. `-INFINITY` disables
/// the sensitivity check or the noise floor.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WbnChannel {
    pub pathloss_exponent: f64,
    pub reference_loss_db: f64,
    pub rx_sensitivity_dbm: f64,
    pub sir_threshold_db: f64,
    pub noise_floor_dbm: f64,
}

impl From<WbnChannel> for ChannelParams {
    fn from(c: WbnChannel) -> Self {
        ChannelParams {
            pathloss_exponent: c.pathloss_exponent,
            reference_loss_db: c.reference_loss_db,
            rx_sensitivity_dbm: c.rx_sensitivity_dbm,
            sir_threshold_db: c.sir_threshold_db,
            noise_floor_dbm: c.noise_floor_dbm,
        }
    }
}

impl From<ChannelParams> for WbnChannel {
    fn from(c: ChannelParams) -> Self {
        WbnChannel {
            pathloss_exponent: c.pathloss_exponent,
            reference_loss_db: c.reference_loss_db,
            rx_sensitivity_dbm: c.rx_sensitivity_dbm,
            sir_threshold_db: c.sir_threshold_db,
            noise_floor_dbm: c.noise_floor_dbm,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WbnJammer {
    pub x: f64,
    pub y: f64,
    pub tx_power_dbm: f64,
    pub active: bool,
}

impl From<WbnJammer> for Jammer {
    fn from(j: WbnJammer) -> Self {
        Jammer {
            position: Point::new(j.x, j.y),
            tx_power_dbm: j.tx_power_dbm,
            active: j.active,
        }
    }
}

/// Counters of one consensus round. `proposer` is -1 when no block
/// proposer applies.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WbnRoundSummary {
    pub success: bool,
    pub confirming_nodes: usize,
    pub tx_events: u64,
    pub rx_events: u64,
    pub slots_elapsed: u64,
    pub elapsed_s: f64,
    pub timed_out: bool,
    pub proposer: i64,
}

/// Minimum viable powers; filled even when the status is
/// `WBN_STATUS_INFEASIBLE`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WbnViability {
    pub p1_star: f64,
    pub p2_star: f64,
    pub r_star: f64,
}

/// Opaque node deployment.
pub struct WbnDeployment(Deployment);

/// Opaque result table.
pub struct WbnTable(SweepTable);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(WbnStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Radio(_) | Error::InvalidSpec(_) => WbnStatus::InvalidArgument,
            Error::Consensus(_) => WbnStatus::Consensus,
            Error::Analytics(AnalyticsError::Infeasible { .. }) => WbnStatus::Infeasible,
            Error::Analytics(_) => WbnStatus::InvalidArgument,
            Error::Config(_) => WbnStatus::Config,
            Error::Io { .. } => WbnStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

impl From<RadioError> for Failure {
    fn from(e: RadioError) -> Self {
        Error::from(e).into()
    }
}

impl From<ConsensusError> for Failure {
    fn from(e: ConsensusError) -> Self {
        Error::from(e).into()
    }
}

fn null(what: &str) -> Failure {
    Failure(WbnStatus::NullPointer, format!("{what} is null"))
}

fn bad(msg: impl Into<String>) -> Failure {
    Failure(WbnStatus::InvalidArgument, msg.into())
}

/// Runs `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> WbnStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => WbnStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            WbnStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or valid for reads of `T`.
unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `p` must be null or valid for writes of `T`.
unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

/// # Safety
/// `p` must be null or a nul-terminated string.
unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| bad(format!("{what} is not valid UTF-8")))
}

fn jammer_opt(jam: *const WbnJammer) -> Option<Jammer> {
    // SAFETY: callers pass null or a pointer to a live WbnJammer.
    unsafe { jam.as_ref() }
        .map(|j| Jammer::from(*j))
        .filter(|j| j.active)
}

fn node_index(dep: &Deployment, id: usize, what: &str) -> Result<usize, Failure> {
    if id < dep.len() {
        Ok(id)
    } else {
        Err(bad(format!(
            "{what} {id} out of range (deployment has {} nodes)",
            dep.len()
        )))
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn wbn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn wbn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The library's default channel.
#[no_mangle]
pub extern "C" fn wbn_channel_default() -> WbnChannel {
    ChannelParams::default().into()
}

/// Every reception succeeds (sensitivity `-INFINITY`).
#[no_mangle]
pub extern "C" fn wbn_channel_perfect() -> WbnChannel {
    ChannelParams::perfect().into()
}

/// Places the leader at the origin and `n - 1` nodes uniformly over a
/// disk of `radius` metres.
///
/// # Safety
/// `out_deployment` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wbn_deployment_place(
    n: usize,
    radius: f64,
    seed: u64,
    out_deployment: *mut *mut WbnDeployment,
) -> WbnStatus {
    guard(|| {
        let slot = out(out_deployment, "out_deployment")?;
        let dep = radio::place_nodes(n, radius, seed)?;
        *slot = Box::into_raw(Box::new(WbnDeployment(dep)));
        Ok(())
    })
}

/// Builds a deployment from `n` explicit coordinates; node 0 leads.
///
/// # Safety
/// `xs` and `ys` must each hold `n` readable doubles; `out_deployment`
/// must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wbn_deployment_from_positions(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    tx_power_dbm: f64,
    out_deployment: *mut *mut WbnDeployment,
) -> WbnStatus {
    guard(|| {
        let slot = out(out_deployment, "out_deployment")?;
        if xs.is_null() || ys.is_null() {
            return Err(null("xs/ys"));
        }
        let xs = std::slice::from_raw_parts(xs, n);
        let ys = std::slice::from_raw_parts(ys, n);
        let points: Vec<Point> = xs.iter().zip(ys).map(|(&x, &y)| Point::new(x, y)).collect();
        let dep = Deployment::from_positions(&points, tx_power_dbm)?;
        *slot = Box::into_raw(Box::new(WbnDeployment(dep)));
        Ok(())
    })
}

/// # Safety
/// `deployment` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wbn_deployment_free(deployment: *mut WbnDeployment) {
    if !deployment.is_null() {
        drop(Box::from_raw(deployment));
    }
}

/// Node count, or 0 for a null handle.
///
/// # Safety
/// `deployment` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wbn_deployment_len(deployment: *const WbnDeployment) -> usize {
    deployment.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `deployment` must be a live handle; `x` and `y` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wbn_deployment_position(
    deployment: *const WbnDeployment,
    id: usize,
    x: *mut f64,
    y: *mut f64,
) -> WbnStatus {
    guard(|| {
        let dep = &deref(deployment, "deployment")?.0;
        let (x, y) = (out(x, "x")?, out(y, "y")?);
        let p = dep.nodes[node_index(dep, id, "id")?].position;
        *x = p.x;
        *y = p.y;
        Ok(())
    })
}

/// Sets every node's transmit power.
///
/// # Safety
/// `deployment` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn wbn_deployment_set_tx_power(
    deployment: *mut WbnDeployment,
    tx_power_dbm: f64,
) -> WbnStatus {
    guard(|| {
        let dep = &mut out(deployment, "deployment")?.0;
        if !tx_power_dbm.is_finite() {
            return Err(bad("tx_power_dbm must be finite"));
        }
        dep.set_tx_power(tx_power_dbm);
        Ok(())
    })
}

/// Marks the highest-numbered nodes faulty: the last `byzantine` become
/// Byzantine, the `crashed` before them Crashed.
///
/// # Safety
/// `deployment` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn wbn_deployment_mark_faults(
    deployment: *mut WbnDeployment,
    byzantine: usize,
    crashed: usize,
) -> WbnStatus {
    guard(|| {
        let dep = &mut out(deployment, "deployment")?.0;
        dep.mark_faults(byzantine, crashed);
        Ok(())
    })
}

/// Does node `to` decode a transmission from node `from`? `jammer` may
/// be null.
///
/// # Safety
/// `deployment` and `channel` must be live; `jammer` null or live;
/// `out_ok` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wbn_link_ok(
    deployment: *const WbnDeployment,
    from: usize,
    to: usize,
    channel: *const WbnChannel,
    jammer: *const WbnJammer,
    out_ok: *mut bool,
) -> WbnStatus {
    guard(|| {
        let dep = &deref(deployment, "deployment")?.0;
        let ch = ChannelParams::from(*deref(channel, "channel")?);
        let slot = out(out_ok, "out_ok")?;
        ch.validate()?;
        let (from, to) = (node_index(dep, from, "from")?, node_index(dep, to, "to")?);
        let jam = jammer_opt(jammer);
        *slot = radio::link_ok(&dep.nodes[from], &dep.nodes[to], &ch, jam.as_ref());
        Ok(())
    })
}

/// Multi-hop flood from `source`. `reached` may be null; otherwise it
/// must hold one byte per node and receives 1 for every node reached.
///
/// # Safety
/// Handles and `channel` must be live; `jammer` null or live; `reached`
/// null or writable for `wbn_deployment_len` bytes; `out_transmissions`
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wbn_flood_reach(
    deployment: *const WbnDeployment,
    source: usize,
    channel: *const WbnChannel,
    jammer: *const WbnJammer,
    reached: *mut u8,
    out_transmissions: *mut usize,
) -> WbnStatus {
    guard(|| {
        let dep = &deref(deployment, "deployment")?.0;
        let ch = ChannelParams::from(*deref(channel, "channel")?);
        let tx_slot = out(out_transmissions, "out_transmissions")?;
        ch.validate()?;
        let source = node_index(dep, source, "source")?;
        let jam = jammer_opt(jammer);
        let result = radio::flood_reach(source, dep, &ch, jam.as_ref());
        if !reached.is_null() {
            let flags = std::slice::from_raw_parts_mut(reached, dep.len());
            for (id, flag) in flags.iter_mut().enumerate() {
                *flag = u8::from(result.reached.contains(&id));
            }
        }
        *tx_slot = result.transmissions;
        Ok(())
    })
}

/// One consensus round over the radio model.
///
/// # Safety
/// Handles and `channel` must be live; `jammer` null or live; `out_summary`
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wbn_run_round(
    deployment: *const WbnDeployment,
    channel: *const WbnChannel,
    jammer: *const WbnJammer,
    mechanism: WbnMechanism,
    fault_budget: usize,
    seed: u64,
    out_summary: *mut WbnRoundSummary,
) -> WbnStatus {
    guard(|| {
        let dep = &deref(deployment, "deployment")?.0;
        let ch = ChannelParams::from(*deref(channel, "channel")?);
        let slot = out(out_summary, "out_summary")?;
        let jam = jammer_opt(jammer);
        let cfg = ConsensusConfig::new(mechanism.into(), fault_budget);
        let r = consensus::run_round(dep, &ch, &cfg, jam.as_ref(), seed)?;
        *slot = WbnRoundSummary {
            success: r.success,
            confirming_nodes: r.confirming_nodes,
            tx_events: r.tx_events,
            rx_events: r.rx_events,
            slots_elapsed: r.slots_elapsed,
            elapsed_s: r.elapsed_s,
            timed_out: r.timed_out,
            proposer: r.proposer.map_or(-1, |p| p as i64),
        };
        Ok(())
    })
}

fn fit_u64(v: u128) -> Result<u64, Failure> {
    u64::try_from(v).map_err(|_| bad(format!("{v} does not fit in 64 bits")))
}

/// Receiver-side message events per round (PBFT `2N^2+N`, Raft and PoW
/// `2N`). Fails if the value exceeds 64 bits.
///
/// # Safety
/// `out_count` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wbn_comm_complexity(
    mechanism: WbnMechanism,
    n: u32,
    out_count: *mut u64,
) -> WbnStatus {
    guard(|| {
        let slot = out(out_count, "out_count")?;
        *slot = fit_u64(analytics::comm_complexity(mechanism.into(), n))?;
        Ok(())
    })
}

/// Transmission slots per round (PBFT `2N+1`, Raft `N+1`, PoW `2`).
///
/// # Safety
/// `out_count` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wbn_spectrum_requirement(
    mechanism: WbnMechanism,
    n: u32,
    out_count: *mut u64,
) -> WbnStatus {
    guard(|| {
        let slot = out(out_count, "out_count")?;
        *slot = fit_u64(analytics::spectrum_requirement(mechanism.into(), n))?;
        Ok(())
    })
}

/// Minimum viable leader and replica powers for `f` faults at density
/// `lambda`. Returns `WBN_STATUS_INFEASIBLE` (with `out` still filled) when
/// the required radius exceeds `r_max`.
///
/// # Safety
/// `channel` must be live; `out_result` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wbn_min_viable_power(
    f: u64,
    lambda: f64,
    channel: *const WbnChannel,
    r_max: f64,
    out_result: *mut WbnViability,
) -> WbnStatus {
    guard(|| {
        let ch = ChannelParams::from(*deref(channel, "channel")?);
        let slot = out(out_result, "out_result")?;
        let fill = |r: analytics::ViabilityResult| WbnViability {
            p1_star: r.p1_star,
            p2_star: r.p2_star,
            r_star: r.r_star,
        };
        match analytics::min_viable_power(f, lambda, &ch, r_max) {
            Ok(r) => {
                *slot = fill(r);
                Ok(())
            }
            Err(AnalyticsError::Infeasible { result, .. }) => {
                *slot = fill(result);
                Err(Error::from(AnalyticsError::Infeasible {
                    r_star: result.r_star,
                    r_max,
                    result,
                })
                .into())
            }
            Err(e) => Err(Error::from(e).into()),
        }
    })
}

/// Runs the experiment described by flat `key=value` config text (which
/// must include an `experiment` key) and returns its main table.
///
/// # Safety
/// `config_text` must be a nul-terminated string; `out_table` valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn wbn_run_config(
    config_text: *const c_char,
    out_table: *mut *mut WbnTable,
) -> WbnStatus {
    guard(|| {
        let text = c_str(config_text, "config_text")?;
        let slot = out(out_table, "out_table")?;
        let sources = ConfigSources {
            file: Some(text.to_string()),
            ..ConfigSources::default()
        };
        let cfg = parse_config(None, &sources).map_err(Error::from)?;
        let output = experiments::run(&cfg.spec)?;
        *slot = Box::into_raw(Box::new(WbnTable(output.main)));
        Ok(())
    })
}

/// # Safety
/// `table` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wbn_table_free(table: *mut WbnTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Data rows, or 0 for a null handle.
///
/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wbn_table_rows(table: *const WbnTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.rows.len())
}

/// Columns, or 0 for a null handle.
///
/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wbn_table_cols(table: *const WbnTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.header.len())
}

/// The table rendered as CSV. Free with [`wbn_string_free`].
///
/// # Safety
/// `table` must be a live handle; `out_csv` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wbn_table_to_csv(
    table: *const WbnTable,
    out_csv: *mut *mut c_char,
) -> WbnStatus {
    guard(|| {
        let t = &deref(table, "table")?.0;
        let slot = out(out_csv, "out_csv")?;
        let bytes = csv_out::to_csv_bytes(t)?;
        let s = CString::new(bytes).map_err(|_| bad("table contains a nul byte"))?;
        *slot = s.into_raw();
        Ok(())
    })
}

/// Writes the table to `path` atomically.
///
/// # Safety
/// `table` must be a live handle; `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn wbn_table_write_csv(
    table: *const WbnTable,
    path: *const c_char,
) -> WbnStatus {
    guard(|| {
        let t = &deref(table, "table")?.0;
        let path = c_str(path, "path")?;
        csv_out::write_csv(t, Path::new(path))?;
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wbn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
