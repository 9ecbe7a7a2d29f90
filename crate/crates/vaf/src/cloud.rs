//! EC2-like cloud mock: instance lifecycle, noisy boot latencies, a hard
//! capacity ceiling, and optional request-failure injection.
//!
//! The cloud owns no event queue. `request_instances` returns the boot
//! completion times it drew and `terminate_instance` returns the teardown
//! time; the calling simulation schedules those as events and calls back
//! into [`CloudState::on_boot_complete`] / [`CloudState::on_teardown_complete`]
//! when they fire. That keeps this module usable from any event-loop payload
//! type.
//!
//! Capacity counts every non-terminated instance, so a tearing-down VM
//! still occupies its slot until the teardown delay elapses.

use thiserror::Error;

use crate::sim::RngStream;

/// Stream id for boot-latency draws, distinct from other consumers.
pub const CLOUD_RNG_STREAM: u64 = 1;

/// Expected, tolerable request outcomes — the autoscaler swallows these.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CloudRequestError {
    #[error("quota exceeded: all {capacity} instance slots in use")]
    QuotaExceeded { capacity: u32 },
    #[error("injected request failure ({0})")]
    InjectedFailure(String),
    #[error("instance count must be >= 1")]
    InvalidCount,
}

/// Caller bugs: wrong ids or transitions that the lifecycle forbids.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CloudError {
    #[error("unknown instance id {0}")]
    UnknownInstance(u32),
    #[error("instance {id} cannot go {from} -> {to}")]
    InvalidTransition {
        id: u32,
        from: &'static str,
        to: &'static str,
    },
    #[error("invalid cloud config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VmState {
    Pending,
    Booting,
    Running,
    Terminating,
    Terminated,
}

impl VmState {
    pub fn name(self) -> &'static str {
        match self {
            VmState::Pending => "pending",
            VmState::Booting => "booting",
            VmState::Running => "running",
            VmState::Terminating => "terminating",
            VmState::Terminated => "terminated",
        }
    }

    fn rank(self) -> u8 {
        match self {
            VmState::Pending => 0,
            VmState::Booting => 1,
            VmState::Running => 2,
            VmState::Terminating => 3,
            VmState::Terminated => 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VmInstance {
    pub id: u32,
    pub state: VmState,
    pub slots: u32,
    pub request_time: f64,
    pub boot_complete_time: Option<f64>,
    pub terminate_time: Option<f64>,
}

impl VmInstance {
    /// Lifecycle transitions go strictly forward; anything else is a bug.
    fn transition(&mut self, to: VmState) -> Result<(), CloudError> {
        if to.rank() != self.state.rank() + 1 {
            return Err(CloudError::InvalidTransition {
                id: self.id,
                from: self.state.name(),
                to: to.name(),
            });
        }
        self.state = to;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum FailurePlan {
    #[default]
    None,
    /// The first `k` requests fail outright (then the cloud behaves).
    FailFirst(u32),
    /// Each request fails independently with probability `q`.
    FailWithProbability(f64),
}

#[derive(Debug, Clone)]
pub struct CloudConfig {
    /// Maximum concurrently existing (non-terminated) instances.
    pub capacity: u32,
    /// Boot latency distribution, truncated to positive values.
    pub boot_mean: f64,
    pub boot_stddev: f64,
    /// Job slots each VM registers with the batch queue.
    pub slots_per_vm: u32,
    /// Delay between a shutdown request and the instance disappearing.
    pub teardown_delay: f64,
    pub failure_plan: FailurePlan,
}

impl Default for CloudConfig {
    fn default() -> Self {
        Self {
            capacity: 100,
            boot_mean: 375.0,
            boot_stddev: 39.0,
            slots_per_vm: 4,
            teardown_delay: 10.0,
            failure_plan: FailurePlan::None,
        }
    }
}

impl CloudConfig {
    pub fn validate(&self) -> Result<(), CloudError> {
        if !self.boot_mean.is_finite() || self.boot_mean <= 0.0 {
            return Err(CloudError::InvalidConfig(format!(
                "boot mean must be finite and > 0, got {}",
                self.boot_mean
            )));
        }
        if !self.boot_stddev.is_finite() || self.boot_stddev < 0.0 {
            return Err(CloudError::InvalidConfig(format!(
                "boot stddev must be finite and >= 0, got {}",
                self.boot_stddev
            )));
        }
        if self.slots_per_vm < 1 {
            return Err(CloudError::InvalidConfig(
                "slots_per_vm must be >= 1".into(),
            ));
        }
        if !self.teardown_delay.is_finite() || self.teardown_delay < 0.0 {
            return Err(CloudError::InvalidConfig(format!(
                "teardown_delay must be finite and >= 0, got {}",
                self.teardown_delay
            )));
        }
        if let FailurePlan::FailWithProbability(q) = self.failure_plan {
            if !(0.0..=1.0).contains(&q) {
                return Err(CloudError::InvalidConfig(format!(
                    "failure probability must be in [0, 1], got {q}"
                )));
            }
        }
        Ok(())
    }
}

/// A freshly granted instance and when its boot will complete.
#[derive(Debug, Clone, Copy)]
pub struct BootTicket {
    pub id: u32,
    pub boot_at: f64,
}

/// When a terminating instance will actually be gone.
#[derive(Debug, Clone, Copy)]
pub struct TeardownTicket {
    pub id: u32,
    pub teardown_at: f64,
}

#[derive(Debug)]
pub struct CloudState {
    config: CloudConfig,
    instances: Vec<VmInstance>,
    rng: RngStream,
    requests_seen: u32,
}

impl CloudState {
    pub fn new(config: CloudConfig, seed: u64) -> Result<Self, CloudError> {
        config.validate()?;
        Ok(Self {
            config,
            instances: Vec::new(),
            rng: RngStream::new(seed, CLOUD_RNG_STREAM),
            requests_seen: 0,
        })
    }

    pub fn config(&self) -> &CloudConfig {
        &self.config
    }

    pub fn instance(&self, id: u32) -> Option<&VmInstance> {
        self.instances.get(id as usize)
    }

    pub fn instances(&self) -> &[VmInstance] {
        &self.instances
    }

    /// Non-terminated instances — what counts against capacity.
    pub fn existing(&self) -> u32 {
        self.count(|s| s != VmState::Terminated)
    }

    pub fn running_count(&self) -> u32 {
        self.count(|s| s == VmState::Running)
    }

    pub fn pending_or_booting(&self) -> u32 {
        self.count(|s| s == VmState::Pending || s == VmState::Booting)
    }

    pub fn terminating_count(&self) -> u32 {
        self.count(|s| s == VmState::Terminating)
    }

    /// Instances ever granted, including terminated ones.
    pub fn total_granted(&self) -> u32 {
        self.instances.len() as u32
    }

    fn count(&self, pred: impl Fn(VmState) -> bool) -> u32 {
        self.instances.iter().filter(|i| pred(i.state)).count() as u32
    }

    /// Ask for `count` new instances. Grants up to the free capacity; a
    /// request that can grant nothing (or that the failure plan kills)
    /// grants nothing and returns an error the caller is expected to
    /// tolerate and re-issue later.
    pub fn request_instances(
        &mut self,
        count: u32,
        now: f64,
    ) -> Result<Vec<BootTicket>, CloudRequestError> {
        if count < 1 {
            return Err(CloudRequestError::InvalidCount);
        }
        self.requests_seen += 1;
        match self.config.failure_plan {
            FailurePlan::FailFirst(k) if self.requests_seen <= k => {
                return Err(CloudRequestError::InjectedFailure(format!(
                    "request {} of the first {k} is set to fail",
                    self.requests_seen
                )));
            }
            // One draw per request keeps the latency draw indices stable.
            FailurePlan::FailWithProbability(q) if q > 0.0 && self.rng.next_f64() <= q => {
                return Err(CloudRequestError::InjectedFailure(format!(
                    "random failure (p = {q})"
                )));
            }
            _ => {}
        }
        let free = self.config.capacity.saturating_sub(self.existing());
        if free == 0 {
            return Err(CloudRequestError::QuotaExceeded {
                capacity: self.config.capacity,
            });
        }
        let granted = count.min(free);
        let mut tickets = Vec::with_capacity(granted as usize);
        for _ in 0..granted {
            let id = self.instances.len() as u32;
            let latency = self
                .rng
                .normal_positive(self.config.boot_mean, self.config.boot_stddev);
            let mut vm = VmInstance {
                id,
                state: VmState::Pending,
                slots: self.config.slots_per_vm,
                request_time: now,
                boot_complete_time: None,
                terminate_time: None,
            };
            // The boot countdown starts with the request; pending->booting
            // has no modeled duration of its own.
            vm.transition(VmState::Booting).expect("pending -> booting");
            self.instances.push(vm);
            tickets.push(BootTicket {
                id,
                boot_at: now + latency,
            });
        }
        Ok(tickets)
    }

    /// The boot event fired: the instance is running and its slots should
    /// be registered with the batch queue by the caller.
    pub fn on_boot_complete(&mut self, id: u32, now: f64) -> Result<&VmInstance, CloudError> {
        let vm = self
            .instances
            .get_mut(id as usize)
            .ok_or(CloudError::UnknownInstance(id))?;
        vm.transition(VmState::Running)?;
        vm.boot_complete_time = Some(now);
        Ok(&self.instances[id as usize])
    }

    /// Begin shutdown: the node's slots vanish immediately (the caller
    /// deregisters it), the instance itself lingers until the teardown
    /// event at `teardown_at`.
    pub fn terminate_instance(
        &mut self,
        id: u32,
        now: f64,
    ) -> Result<TeardownTicket, CloudError> {
        let vm = self
            .instances
            .get_mut(id as usize)
            .ok_or(CloudError::UnknownInstance(id))?;
        vm.transition(VmState::Terminating)?;
        vm.terminate_time = Some(now);
        Ok(TeardownTicket {
            id,
            teardown_at: now + self.config.teardown_delay,
        })
    }

    pub fn on_teardown_complete(&mut self, id: u32, _now: f64) -> Result<(), CloudError> {
        let vm = self
            .instances
            .get_mut(id as usize)
            .ok_or(CloudError::UnknownInstance(id))?;
        vm.transition(VmState::Terminated)
    }
}

/// One row of a boot-latency experiment: deployment request through to the
/// worker showing up in the batch queue.
#[derive(Debug, Clone, Copy)]
pub struct BootRow {
    pub vm: u32,
    pub request_time: f64,
    pub boot_latency: f64,
    /// Boot completion plus one registration tick — the worker's first
    /// heartbeat after coming up is when the queue actually sees it.
    pub join_time: f64,
}

/// Request `vms` instances at t=0 and report when each joins. Grants are
/// capped by capacity, so a request beyond capacity yields fewer rows.
pub fn boot_latency_rows(
    config: &CloudConfig,
    vms: u32,
    registration_tick: f64,
    seed: u64,
) -> Result<Vec<BootRow>, CloudError> {
    config.validate()?;
    if !(registration_tick.is_finite() && registration_tick >= 0.0) {
        return Err(CloudError::InvalidConfig(
            "registration_tick must be finite and >= 0".into(),
        ));
    }
    let mut cloud = CloudState::new(config.clone(), seed)?;
    let tickets = cloud
        .request_instances(vms, 0.0)
        .map_err(|e| CloudError::InvalidConfig(format!("boot request refused: {e}")))?;
    Ok(tickets
        .iter()
        .map(|t| BootRow {
            vm: t.id,
            request_time: 0.0,
            boot_latency: t.boot_at,
            join_time: t.boot_at + registration_tick,
        })
        .collect())
}
