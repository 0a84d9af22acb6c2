use std::collections::VecDeque;

use super::fel::{EventKind, FutureEventList};
use super::EngineError;

/// A passenger entering service at a desk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceStart {
    pub passenger: usize,
    pub desk: usize,
    pub start: f64,
    pub completion: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct InService {
    passenger: usize,
    completion: f64,
}

/// Result of a service completion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Completion {
    pub departed: usize,
    pub next: Option<ServiceStart>,
    /// The desk was above the current staffing level and has shut.
    pub closed: bool,
}

/// FCFS multi-desk service node.
///
/// Desk slots are indexed from 0; slot `i` may accept new work only while
/// `i < active_desks`. Slots at or above the level finish their current
/// passenger and then stay shut.
#[derive(Debug, Clone, Default)]
pub struct QueueState {
    waiting: VecDeque<(usize, f64)>,
    desks: Vec<Option<InService>>,
    active_desks: u32,
}

impl QueueState {
    pub fn new(active_desks: u32) -> Self {
        QueueState { waiting: VecDeque::new(), desks: vec![None; active_desks as usize], active_desks }
    }

    pub fn active_desks(&self) -> u32 {
        self.active_desks
    }

    pub fn waiting_len(&self) -> usize {
        self.waiting.len()
    }

    /// Passenger ids in queue order.
    pub fn waiting(&self) -> impl Iterator<Item = usize> + '_ {
        self.waiting.iter().map(|&(p, _)| p)
    }

    pub fn in_service(&self) -> usize {
        self.desks.iter().flatten().count()
    }

    /// Busy desks that are within the current staffing level.
    pub fn busy_eligible(&self) -> usize {
        self.desks.iter().take(self.active_desks as usize).flatten().count()
    }

    pub fn idle_eligible(&self) -> usize {
        self.active_desks as usize - self.busy_eligible()
    }

    /// Passenger at `desk`, if busy.
    pub fn serving(&self, desk: usize) -> Option<usize> {
        self.desks.get(desk).copied().flatten().map(|s| s.passenger)
    }

    fn first_idle_eligible(&self) -> Option<usize> {
        (0..self.active_desks as usize).find(|&d| self.desks[d].is_none())
    }

    fn start(
        &mut self,
        passenger: usize,
        desk: usize,
        t: f64,
        duration: f64,
        fel: &mut FutureEventList,
    ) -> Result<ServiceStart, EngineError> {
        if !(duration.is_finite() && duration >= 0.0) {
            return Err(EngineError::InvalidServiceTime(duration));
        }
        let completion = t + duration;
        fel.schedule(completion, EventKind::ServiceCompletion { desk, passenger })?;
        self.desks[desk] = Some(InService { passenger, completion });
        Ok(ServiceStart { passenger, desk, start: t, completion })
    }

    /// Serves waiting passengers on idle eligible desks until one runs out.
    fn pull_waiting(
        &mut self,
        t: f64,
        fel: &mut FutureEventList,
        draw: &mut dyn FnMut(f64) -> f64,
    ) -> Result<Vec<ServiceStart>, EngineError> {
        let mut started = Vec::new();
        while !self.waiting.is_empty() {
            let Some(desk) = self.first_idle_eligible() else { break };
            let (p, _) = self.waiting.pop_front().expect("non-empty");
            started.push(self.start(p, desk, t, draw(t), fel)?);
        }
        Ok(started)
    }

    /// A passenger reaches the queue at `t`. Returns the service start when a
    /// desk was free and nobody was waiting; otherwise the passenger joins
    /// the tail. `draw(t)` is only called when service starts.
    pub fn handle_queue_arrival(
        &mut self,
        passenger: usize,
        t: f64,
        fel: &mut FutureEventList,
        draw: &mut dyn FnMut(f64) -> f64,
    ) -> Result<Option<ServiceStart>, EngineError> {
        if t < fel.clock() {
            return Err(EngineError::Causality { time: t, clock: fel.clock() });
        }
        if self.waiting.is_empty() {
            if let Some(desk) = self.first_idle_eligible() {
                return self.start(passenger, desk, t, draw(t), fel).map(Some);
            }
        }
        self.waiting.push_back((passenger, t));
        Ok(None)
    }

    /// `desk` finishes its passenger at `t`. An eligible desk takes the head
    /// of the queue; a desk above the staffing level closes.
    pub fn handle_service_completion(
        &mut self,
        desk: usize,
        t: f64,
        fel: &mut FutureEventList,
        draw: &mut dyn FnMut(f64) -> f64,
    ) -> Result<Completion, EngineError> {
        let Some(done) = self.desks.get_mut(desk).and_then(Option::take) else {
            return Err(EngineError::DeskNotBusy(desk));
        };
        debug_assert!(done.completion <= t);
        if desk >= self.active_desks as usize {
            return Ok(Completion { departed: done.passenger, next: None, closed: true });
        }
        let next = match self.waiting.pop_front() {
            Some((p, _)) => Some(self.start(p, desk, t, draw(t), fel)?),
            None => None,
        };
        Ok(Completion { departed: done.passenger, next, closed: false })
    }

    /// Changes the staffing level. New desks immediately serve the queue;
    /// desks above a lowered level are not preempted.
    pub fn apply_staffing_change(
        &mut self,
        new_count: u32,
        t: f64,
        fel: &mut FutureEventList,
        draw: &mut dyn FnMut(f64) -> f64,
    ) -> Result<Vec<ServiceStart>, EngineError> {
        self.active_desks = new_count;
        if self.desks.len() < new_count as usize {
            self.desks.resize(new_count as usize, None);
        }
        self.pull_waiting(t, fel, draw)
    }
}
