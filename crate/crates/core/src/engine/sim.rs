use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::fel::{EventKind, FutureEventList, StaffingDirective};
use super::policy::CongestionPolicy;
use super::queue::{QueueState, ServiceStart};
use super::EngineError;
use crate::calibrate::{sample_walk_time, CalibrateError, ServiceRateModel, WalkSpeedModel};
use crate::ingest::{FlightArrival, FlightOccupancyDistribution};
use crate::staffing::StaffingSchedule;
use crate::time::BinGrid;

/// Draws service durations (s) for a passenger starting service at `t`.
pub trait ServiceTimeSampler {
    fn duration(&mut self, t: f64, rng: &mut dyn RngCore) -> f64;
}

/// Exponential service whose rate is a fresh draw from the empirical
/// per-desk distribution for every passenger.
pub struct EmpiricalServiceTimes<'a> {
    model: &'a ServiceRateModel,
}

impl<'a> EmpiricalServiceTimes<'a> {
    pub fn new(model: &'a ServiceRateModel) -> Self {
        EmpiricalServiceTimes { model }
    }
}

impl ServiceTimeSampler for EmpiricalServiceTimes<'_> {
    fn duration(&mut self, _t: f64, rng: &mut dyn RngCore) -> f64 {
        let rate = self.model.sample_rate_per_second(rng);
        let e: f64 = Exp1.sample(rng);
        e / rate
    }
}

pub struct ExponentialServiceTimes {
    pub rate_per_second: f64,
}

impl ServiceTimeSampler for ExponentialServiceTimes {
    fn duration(&mut self, _t: f64, rng: &mut dyn RngCore) -> f64 {
        let e: f64 = Exp1.sample(rng);
        e / self.rate_per_second
    }
}

pub struct FixedServiceTimes(pub f64);

impl ServiceTimeSampler for FixedServiceTimes {
    fn duration(&mut self, _t: f64, _rng: &mut dyn RngCore) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StaffingControl {
    Schedule(StaffingSchedule),
    Policy(CongestionPolicy),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Waiting-line length beyond which a run is declared unstable and stopped.
    pub instability_cap: usize,
    pub seed: u64,
    pub bins: BinGrid,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig { instability_cap: 100_000, seed: 0, bins: BinGrid::default() }
    }
}

/// A passenger with a known queue-arrival time, bypassing flight generation.
#[derive(Debug, Clone, PartialEq)]
pub struct PassengerArrival {
    pub flight_id: String,
    pub gate: String,
    pub gate_time: f64,
    pub queue_arrival: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassengerTrace {
    pub passenger_id: u64,
    pub flight_id: String,
    pub gate: String,
    pub gate_time: f64,
    pub queue_arrival: f64,
    pub service_start: f64,
    pub departure: f64,
    pub desk: usize,
}

impl PassengerTrace {
    /// Queue arrival to start of service.
    pub fn wait(&self) -> f64 {
        self.service_start - self.queue_arrival
    }

    /// Queue arrival to departure from the desk.
    pub fn sojourn(&self) -> f64 {
        self.departure - self.queue_arrival
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnservedPassenger {
    pub passenger_id: u64,
    pub flight_id: String,
    pub queue_arrival: f64,
    /// Whether the passenger had joined the queue when the run stopped.
    pub reached_queue: bool,
}

/// State at the end of a bin (just before any event at the bin boundary).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueSnapshot {
    pub bin_start: f64,
    pub queue_length: usize,
    pub in_service: usize,
    pub active_desks: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SimDiagnostics {
    pub unstable: bool,
    pub max_queue: usize,
    pub events_processed: u64,
    pub generated: usize,
    pub served: usize,
}

/// Time integrals of the number waiting and the number in the system.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OccupancyIntegrals {
    pub start: f64,
    pub end: f64,
    pub queue_area: f64,
    pub system_area: f64,
}

impl OccupancyIntegrals {
    pub fn mean_queue_length(&self) -> f64 {
        self.queue_area / (self.end - self.start)
    }

    pub fn mean_in_system(&self) -> f64 {
        self.system_area / (self.end - self.start)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    /// Served passengers ordered by id.
    pub traces: Vec<PassengerTrace>,
    pub unserved: Vec<UnservedPassenger>,
    pub queue_length_series: Vec<QueueSnapshot>,
    pub diagnostics: SimDiagnostics,
    pub occupancy: OccupancyIntegrals,
}

/// Engine state after each processed event, for invariant checking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventSnapshot {
    pub time: f64,
    pub kind: EventKind,
    pub waiting: usize,
    pub in_service: usize,
    /// Busy desks within the staffing level.
    pub busy_eligible: usize,
    pub idle_eligible: usize,
    pub active_desks: u32,
    pub generated: usize,
    pub arrived: usize,
    pub departed: usize,
}

pub trait SimObserver {
    fn after_event(&mut self, _snapshot: &EventSnapshot) {}
}

impl SimObserver for () {}

/// Queue-arrival times for one flight: block time plus an independent walk
/// time per passenger. The passenger count comes from the schedule when
/// present, otherwise from the occupancy distribution.
pub fn generate_passenger_arrivals<R: Rng + ?Sized>(
    flight: &FlightArrival,
    occupancy: &FlightOccupancyDistribution,
    walk_model: &WalkSpeedModel,
    rng: &mut R,
) -> Result<Vec<f64>, EngineError> {
    if walk_model.distance(&flight.gate).is_none() {
        return Err(CalibrateError::UnknownGate(flight.gate.clone()).into());
    }
    let n = match flight.passenger_count {
        Some(n) => n,
        None => occupancy
            .sample(&flight.flight_id, rng)
            .ok_or_else(|| EngineError::NoOccupancy(flight.flight_id.clone()))?,
    };
    let block = flight.actual_time as f64;
    (0..n).map(|_| Ok(block + sample_walk_time(walk_model, &flight.gate, rng)?)).collect()
}

struct Passenger {
    label: usize,
    gate_time: f64,
    queue_arrival: f64,
    service_start: f64,
    departure: f64,
    desk: usize,
    arrived: bool,
}

struct FlightSource<'a> {
    flights: &'a [FlightArrival],
    occupancy: &'a FlightOccupancyDistribution,
    walk: &'a WalkSpeedModel,
}

struct Simulator<'a, S, O> {
    fel: FutureEventList,
    queue: QueueState,
    passengers: Vec<Passenger>,
    /// (flight id, gate) pairs referenced by passengers.
    labels: Vec<(String, String)>,
    source: Option<FlightSource<'a>>,
    sampler: S,
    observer: &'a mut O,
    arrival_rng: ChaCha8Rng,
    service_rng: ChaCha8Rng,
    policy: Option<CongestionPolicy>,
    config: SimulationConfig,
    series: Vec<QueueSnapshot>,
    next_boundary: f64,
    occupancy: OccupancyIntegrals,
    last_time: f64,
    diagnostics: SimDiagnostics,
    arrived: usize,
}

impl<'a, S: ServiceTimeSampler, O: SimObserver> Simulator<'a, S, O> {
    fn new(
        start: f64,
        control: &StaffingControl,
        sampler: S,
        observer: &'a mut O,
        config: SimulationConfig,
    ) -> Result<Self, EngineError> {
        let mut fel = FutureEventList::new(start);
        let (initial, policy) = match control {
            StaffingControl::Schedule(schedule) => {
                let initial = schedule.desks_at(start).ok_or(EngineError::StaffingNotCovering {
                    schedule_start: schedule.start(),
                    first_event: start,
                })?;
                for &(t, desks) in schedule.breakpoints().iter().filter(|(t, _)| *t > start) {
                    fel.schedule(t, EventKind::StaffingChange(StaffingDirective::Set(desks)))?;
                }
                (initial, None)
            }
            StaffingControl::Policy(p) => {
                p.validate()?;
                fel.schedule(
                    start + p.review_interval,
                    EventKind::StaffingChange(StaffingDirective::Review),
                )?;
                (p.initial_desks.clamp(p.min_desks, p.max_desks), Some(*p))
            }
        };
        let mut arrival_rng = ChaCha8Rng::seed_from_u64(config.seed);
        arrival_rng.set_stream(1);
        let mut service_rng = ChaCha8Rng::seed_from_u64(config.seed);
        service_rng.set_stream(2);
        let grid = config.bins;
        Ok(Simulator {
            fel,
            queue: QueueState::new(initial),
            passengers: Vec::new(),
            labels: Vec::new(),
            source: None,
            sampler,
            observer,
            arrival_rng,
            service_rng,
            policy,
            config,
            series: Vec::new(),
            next_boundary: grid.end(grid.index(start)),
            occupancy: OccupancyIntegrals { start, end: start, queue_area: 0.0, system_area: 0.0 },
            last_time: start,
            diagnostics: SimDiagnostics::default(),
            arrived: 0,
        })
    }

    fn add_passenger(&mut self, label: usize, gate_time: f64, queue_arrival: f64) -> Result<(), EngineError> {
        let id = self.passengers.len();
        self.passengers.push(Passenger {
            label,
            gate_time,
            queue_arrival,
            service_start: f64::NAN,
            departure: f64::NAN,
            desk: usize::MAX,
            arrived: false,
        });
        self.fel.schedule(queue_arrival, EventKind::PassengerQueueArrival { passenger: id })?;
        Ok(())
    }

    fn record_start(&mut self, s: ServiceStart) {
        let p = &mut self.passengers[s.passenger];
        p.service_start = s.start;
        p.desk = s.desk;
    }

    /// Accumulates occupancy and emits bin-end snapshots up to `t`.
    fn advance(&mut self, t: f64) {
        let dt = t - self.last_time;
        let waiting = self.queue.waiting_len();
        let in_service = self.queue.in_service();
        self.occupancy.queue_area += waiting as f64 * dt;
        self.occupancy.system_area += (waiting + in_service) as f64 * dt;
        while t >= self.next_boundary {
            self.series.push(QueueSnapshot {
                bin_start: self.next_boundary - self.config.bins.width,
                queue_length: waiting,
                in_service,
                active_desks: self.queue.active_desks(),
            });
            self.next_boundary += self.config.bins.width;
        }
        self.last_time = t;
    }

    /// Every passenger has departed and none is still to come; pending
    /// staffing changes alone do not extend the run.
    fn drained(&self) -> bool {
        !self.fel.has_pending_flow() && self.queue.waiting_len() == 0 && self.queue.in_service() == 0
    }

    fn run(mut self) -> Result<SimulationResult, EngineError> {
        while let Some(notice) = self.fel.pop() {
            let t = notice.time;
            self.advance(t);
            let (fel, queue) = (&mut self.fel, &mut self.queue);
            let (sampler, service_rng) = (&mut self.sampler, &mut self.service_rng);
            let mut draw = |at: f64| sampler.duration(at, service_rng);
            match notice.kind {
                EventKind::FlightArrival { flight } => {
                    let source = self.source.as_ref().expect("flight events need a flight source");
                    let f = &source.flights[flight];
                    let times =
                        generate_passenger_arrivals(f, source.occupancy, source.walk, &mut self.arrival_rng)?;
                    let label = self.labels.len();
                    self.labels.push((f.flight_id.clone(), f.gate.clone()));
                    for q in times {
                        self.add_passenger(label, t, q)?;
                    }
                }
                EventKind::PassengerQueueArrival { passenger } => {
                    let started = queue.handle_queue_arrival(passenger, t, fel, &mut draw)?;
                    self.passengers[passenger].arrived = true;
                    self.arrived += 1;
                    if let Some(s) = started {
                        self.record_start(s);
                    }
                    let len = self.queue.waiting_len();
                    self.diagnostics.max_queue = self.diagnostics.max_queue.max(len);
                    if len > self.config.instability_cap {
                        self.diagnostics.unstable = true;
                    }
                }
                EventKind::ServiceCompletion { desk, passenger } => {
                    let c = queue.handle_service_completion(desk, t, fel, &mut draw)?;
                    debug_assert_eq!(c.departed, passenger);
                    self.passengers[c.departed].departure = t;
                    self.diagnostics.served += 1;
                    if let Some(s) = c.next {
                        self.record_start(s);
                    }
                }
                EventKind::StaffingChange(directive) => {
                    let target = match directive {
                        StaffingDirective::Set(n) => Some(n),
                        StaffingDirective::Review => {
                            let policy = self.policy.expect("reviews only run under a policy");
                            let next = policy.next_level(queue.waiting_len(), queue.active_desks());
                            (next != queue.active_desks()).then_some(next)
                        }
                    };
                    if let Some(n) = target {
                        for s in queue.apply_staffing_change(n, t, fel, &mut draw)? {
                            self.record_start(s);
                        }
                    }
                    if directive == StaffingDirective::Review && !self.drained() {
                        let interval = self.policy.expect("policy").review_interval;
                        self.fel
                            .schedule(t + interval, EventKind::StaffingChange(StaffingDirective::Review))?;
                    }
                }
            }
            self.diagnostics.events_processed += 1;
            let snapshot = EventSnapshot {
                time: t,
                kind: notice.kind,
                waiting: self.queue.waiting_len(),
                in_service: self.queue.in_service(),
                busy_eligible: self.queue.busy_eligible(),
                idle_eligible: self.queue.idle_eligible(),
                active_desks: self.queue.active_desks(),
                generated: self.passengers.len(),
                arrived: self.arrived,
                departed: self.diagnostics.served,
            };
            self.observer.after_event(&snapshot);
            if self.diagnostics.unstable || self.drained() {
                break;
            }
        }
        Ok(self.finish())
    }

    fn finish(mut self) -> SimulationResult {
        // Close the bin holding the final event.
        let end = self.last_time;
        if self.series.last().is_none_or(|s| s.bin_start + self.config.bins.width <= end) {
            self.series.push(QueueSnapshot {
                bin_start: self.next_boundary - self.config.bins.width,
                queue_length: self.queue.waiting_len(),
                in_service: self.queue.in_service(),
                active_desks: self.queue.active_desks(),
            });
        }
        self.occupancy.end = end;
        self.diagnostics.generated = self.passengers.len();

        let mut traces = Vec::with_capacity(self.diagnostics.served);
        let mut unserved = Vec::new();
        for (id, p) in self.passengers.into_iter().enumerate() {
            let (flight_id, gate) = &self.labels[p.label];
            if p.departure.is_nan() {
                unserved.push(UnservedPassenger {
                    passenger_id: id as u64,
                    flight_id: flight_id.clone(),
                    queue_arrival: p.queue_arrival,
                    reached_queue: p.arrived,
                });
                continue;
            }
            traces.push(PassengerTrace {
                passenger_id: id as u64,
                flight_id: flight_id.clone(),
                gate: gate.clone(),
                gate_time: p.gate_time,
                queue_arrival: p.queue_arrival,
                service_start: p.service_start,
                departure: p.departure,
                desk: p.desk,
            });
        }
        SimulationResult {
            traces,
            unserved,
            queue_length_series: self.series,
            diagnostics: self.diagnostics,
            occupancy: self.occupancy,
        }
    }
}

/// Simulates one day of flights with service times drawn from the empirical
/// per-desk rate distribution.
pub fn simulate_day(
    flights: &[FlightArrival],
    occupancy: &FlightOccupancyDistribution,
    walk_model: &WalkSpeedModel,
    service_model: &ServiceRateModel,
    staffing: &StaffingControl,
    config: &SimulationConfig,
) -> Result<SimulationResult, EngineError> {
    simulate_day_with(
        flights,
        occupancy,
        walk_model,
        EmpiricalServiceTimes::new(service_model),
        staffing,
        config,
        &mut (),
    )
}

/// [`simulate_day`] with a custom service sampler and event observer.
pub fn simulate_day_with<S: ServiceTimeSampler, O: SimObserver>(
    flights: &[FlightArrival],
    occupancy: &FlightOccupancyDistribution,
    walk_model: &WalkSpeedModel,
    sampler: S,
    staffing: &StaffingControl,
    config: &SimulationConfig,
    observer: &mut O,
) -> Result<SimulationResult, EngineError> {
    let start = flights.iter().map(|f| f.actual_time).min().ok_or(EngineError::NoArrivals)? as f64;
    let mut sim = Simulator::new(start, staffing, sampler, observer, *config)?;
    for (i, f) in flights.iter().enumerate() {
        sim.fel.schedule(f.actual_time as f64, EventKind::FlightArrival { flight: i })?;
    }
    sim.source = Some(FlightSource { flights, occupancy, walk: walk_model });
    sim.run()
}

/// Simulates the service node for passengers whose queue-arrival times are
/// already known.
pub fn simulate_arrivals<S: ServiceTimeSampler, O: SimObserver>(
    arrivals: &[PassengerArrival],
    sampler: S,
    staffing: &StaffingControl,
    config: &SimulationConfig,
    observer: &mut O,
) -> Result<SimulationResult, EngineError> {
    let start =
        arrivals.iter().map(|a| a.queue_arrival).min_by(f64::total_cmp).ok_or(EngineError::NoArrivals)?;
    let mut sim = Simulator::new(start, staffing, sampler, observer, *config)?;
    let mut label_of = std::collections::HashMap::new();
    for a in arrivals {
        let key = (a.flight_id.clone(), a.gate.clone());
        let label = *label_of.entry(key.clone()).or_insert_with(|| {
            sim.labels.push(key);
            sim.labels.len() - 1
        });
        sim.add_passenger(label, a.gate_time, a.queue_arrival)?;
    }
    sim.run()
}
