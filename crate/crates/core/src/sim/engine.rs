//! The event loop tying MAC, medium, loss chain and traffic together.
//!
//! All configured nodes share one collision domain: every transmission is
//! sensed by every node, and any overlap corrupts every frame involved.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::chain::{InterferenceLoss, LossChain, LossElement};
use super::config::{BlockedPolicy, ScenarioConfig, TrafficModel};
use super::event::{EventKind, EventQueue, TxId};
use super::mac::{MacState, NodeState, RetryOutcome};
use super::meter::{meter, Delivery, ThroughputSeries};
use super::phy::{airtime, decode, Frame};
use super::survey::SurveyRecorder;
use super::SimError;
use crate::occupancy::{sender_gate, GateDecision, GateRecord, Mechanism, OccupancyRegistry};
use crate::tracekit::SurveySample;
use crate::NodeId;

/// Per-flow frame accounting. At the end of a run
/// `enqueued == acked + dropped_retry + dropped_blocked + pending`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlowStats {
    pub flow: u32,
    pub enqueued: u64,
    pub acked: u64,
    pub dropped_retry: u64,
    pub dropped_blocked: u64,
    /// Still queued or in flight when the run ended.
    pub pending: u64,
    /// CBR arrivals refused because the source queue was full.
    pub overflow: u64,
    /// Distinct frames handed to the receiving application.
    pub delivered: u64,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub series: Vec<ThroughputSeries>,
    pub flows: Vec<FlowStats>,
    pub decisions: Vec<GateRecord>,
    /// Emulated survey counters, when requested.
    pub survey: Vec<SurveySample>,
    pub events_processed: u64,
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioOutput, SimError> {
    Simulator::new(config)?.run()
}

#[derive(Debug, Clone)]
struct Transmission {
    frame: Frame,
    corrupted: bool,
    rx_power_dbm: f64,
}

#[derive(Debug)]
struct FlowRuntime {
    stats: FlowStats,
    next_seq: u64,
}

pub struct Simulator<'a> {
    config: &'a ScenarioConfig,
    now: u64,
    end_us: u64,
    events: EventQueue,
    nodes: Vec<NodeState>,
    node_index: BTreeMap<NodeId, usize>,
    on_air: Vec<TxId>,
    idle_since: u64,
    txs: BTreeMap<TxId, Transmission>,
    next_tx: TxId,
    chain: LossChain,
    sender_registry: Option<&'a OccupancyRegistry>,
    flows: Vec<FlowRuntime>,
    flow_index: BTreeMap<u32, usize>,
    deliveries: Vec<Delivery>,
    decisions: Vec<GateRecord>,
    survey: Option<SurveyRecorder>,
    processed: u64,
}

impl<'a> Simulator<'a> {
    pub fn new(config: &'a ScenarioConfig) -> Result<Self, SimError> {
        config.validate()?;
        let phy = &config.phy;
        let mut elements = alloc::vec![LossElement::LinkQuality {
            model: phy.link.clone(),
            noise_floor_dbm: phy.noise_floor_dbm,
        }];
        if let Some(fs) = &phy.free_space {
            elements.push(LossElement::FreeSpace(fs.clone()));
        }
        if let Some(registry) = &config.occupancy.interference {
            elements.push(LossElement::Interference(InterferenceLoss::new(
                registry.clone(),
                config.seed,
            )));
        }
        let nodes: Vec<NodeState> = config
            .nodes
            .iter()
            .map(|n| NodeState::new(n.id, &phy.params, config.seed))
            .collect();
        let node_index = nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let survey = config.record_survey.then(|| {
            let ids: Vec<NodeId> = config.nodes.iter().map(|n| n.id).collect();
            SurveyRecorder::new(&ids, config.survey_window_ms, config.duration_ms)
        });
        let mut events = EventQueue::new();
        for f in &config.flows {
            events.schedule(f.start_ms * 1000, EventKind::AppEnqueue { flow: f.id });
        }
        Ok(Simulator {
            config,
            now: 0,
            end_us: config.duration_ms * 1000,
            events,
            nodes,
            node_index,
            on_air: Vec::new(),
            idle_since: 0,
            txs: BTreeMap::new(),
            next_tx: 0,
            chain: LossChain::new(elements)?,
            sender_registry: config.occupancy.sender_gate.as_ref(),
            flows: config
                .flows
                .iter()
                .map(|f| FlowRuntime {
                    stats: FlowStats { flow: f.id, ..Default::default() },
                    next_seq: 0,
                })
                .collect(),
            flow_index: config.flows.iter().enumerate().map(|(i, f)| (f.id, i)).collect(),
            deliveries: Vec::new(),
            decisions: Vec::new(),
            survey,
            processed: 0,
        })
    }

    pub fn run(mut self) -> Result<ScenarioOutput, SimError> {
        while let Some(event) = self.events.pop() {
            if event.time_us >= self.end_us {
                break;
            }
            assert!(event.time_us >= self.now, "event scheduled in the past");
            self.now = event.time_us;
            self.processed += 1;
            match event.kind {
                EventKind::AppEnqueue { flow } => self.on_app_enqueue(flow)?,
                EventKind::BackoffExpire { node, generation } => self.on_backoff_expire(node, generation)?,
                EventKind::DeferEnd { node, generation } => self.on_defer_end(node, generation),
                EventKind::TxStart { node, ack_for } => self.on_ack_start(node, ack_for)?,
                EventKind::TxEnd { tx } => self.on_tx_end(tx),
                EventKind::RxDecide { tx } => self.on_rx_decide(tx),
                EventKind::AckTimeout { node, generation } => self.on_ack_timeout(node, generation),
            }
        }
        Ok(self.finish())
    }

    fn finish(mut self) -> ScenarioOutput {
        for node in &self.nodes {
            for frame in &node.queue {
                self.flows[self.flow_index[&frame.flow]].stats.pending += 1;
            }
        }
        let series = self
            .config
            .flows
            .iter()
            .map(|f| meter(&self.deliveries, f.id, self.config.meter_interval_ms, self.config.duration_ms))
            .collect();
        ScenarioOutput {
            series,
            flows: self.flows.iter().map(|f| f.stats).collect(),
            decisions: self.decisions,
            survey: self.survey.map(|s| s.finish(self.end_us)).unwrap_or_default(),
            events_processed: self.processed,
        }
    }

    fn node_mut(&mut self, id: NodeId) -> &mut NodeState {
        let i = self.node_index[&id];
        &mut self.nodes[i]
    }

    fn flow_active(&self, flow: usize) -> bool {
        let f = &self.config.flows[flow];
        self.now >= f.start_ms * 1000 && f.stop_ms.is_none_or(|stop| self.now < stop * 1000)
    }

    fn enqueue(&mut self, flow: usize) -> bool {
        let config = self.config;
        let f = &config.flows[flow];
        let queue_limit = self.config.queue_limit;
        let rt = &mut self.flows[flow];
        let frame = Frame {
            src: f.src,
            dst: f.dst,
            payload_bytes: f.payload_bytes,
            tx_power_dbm: self.config.phy.tx_power_dbm,
            rate: f.rate.unwrap_or(config.phy.data_rate),
            is_ack: false,
            flow: f.id,
            seq: rt.next_seq,
        };
        let i = self.node_index[&f.src];
        let node = &mut self.nodes[i];
        if node.queue.len() >= queue_limit {
            rt.stats.overflow += 1;
            return false;
        }
        rt.next_seq += 1;
        rt.stats.enqueued += 1;
        node.queue.push_back(frame);
        if node.state == MacState::Idle {
            self.contend(f.src);
        }
        true
    }

    fn on_app_enqueue(&mut self, flow_id: u32) -> Result<(), SimError> {
        let flow = self.flow_index[&flow_id];
        if !self.flow_active(flow) {
            return Ok(());
        }
        let config = self.config;
        let f = &config.flows[flow];
        match f.traffic.cbr_rate_at(self.now) {
            None => {
                self.enqueue(flow);
            }
            Some((rate, next_change)) => {
                if rate > 0.0 {
                    let gap = libm::round(f64::from(f.payload_bytes) * 8.0 / rate).max(1.0) as u64;
                    self.enqueue(flow);
                    self.events.schedule(self.now + gap, EventKind::AppEnqueue { flow: flow_id });
                } else if let Some(t) = next_change {
                    self.events.schedule(t, EventKind::AppEnqueue { flow: flow_id });
                }
            }
        }
        Ok(())
    }

    /// Keeps a saturated source's queue non-empty.
    fn refill(&mut self, flow_id: u32) {
        let flow = self.flow_index[&flow_id];
        if matches!(self.config.flows[flow].traffic, TrafficModel::Saturated) && self.flow_active(flow) {
            self.enqueue(flow);
        }
    }

    /// Draws a fresh backoff for the head frame and starts contending, or
    /// goes idle when the queue is empty.
    fn contend(&mut self, id: NodeId) {
        let node = self.node_mut(id);
        if node.queue.is_empty() {
            node.state = MacState::Idle;
            node.countdown = None;
            return;
        }
        node.draw_backoff();
        node.state = MacState::Contending;
        self.try_access(id);
    }

    fn try_access(&mut self, id: NodeId) {
        if !self.on_air.is_empty() {
            return;
        }
        let (idle_since, now) = (self.idle_since, self.now);
        let params = self.config.phy.params;
        let node = self.node_mut(id);
        let (expire, generation) = node.start_countdown(idle_since, now, &params);
        self.events.schedule(expire, EventKind::BackoffExpire { node: id, generation });
    }

    fn on_backoff_expire(&mut self, id: NodeId, generation: u64) -> Result<(), SimError> {
        let now = self.now;
        let node = self.node_mut(id);
        if node.generation != generation || node.state != MacState::Contending {
            return Ok(());
        }
        node.countdown = None;
        node.backoff_slots = 0;
        if let Some(registry) = self.sender_registry {
            let co = registry.lookup(id, now).fraction();
            let node = self.node_mut(id);
            let decision = sender_gate(co, node.sender_rng.uniform());
            self.log(id, Mechanism::Sender, decision);
            if decision.is_blocked() {
                return self.on_blocked(id);
            }
        }
        self.start_data(id)
    }

    fn on_blocked(&mut self, id: NodeId) -> Result<(), SimError> {
        match self.config.occupancy.blocked {
            BlockedPolicy::Defer => {
                let (params, mtu) = (self.config.phy.params, self.config.phy.mtu_bytes);
                let now = self.now;
                let node = self.node_mut(id);
                let head = *node.head().expect("contending node has a frame");
                node.state = MacState::Deferring;
                node.generation += 1;
                let generation = node.generation;
                let hold = airtime(&head, &params, mtu)?;
                self.events.schedule(now + hold, EventKind::DeferEnd { node: id, generation });
            }
            BlockedPolicy::Drop => {
                let frame = self.node_mut(id).queue.pop_front().expect("contending node has a frame");
                self.flows[self.flow_index[&frame.flow]].stats.dropped_blocked += 1;
                self.refill(frame.flow);
                self.contend(id);
            }
        }
        Ok(())
    }

    fn on_defer_end(&mut self, id: NodeId, generation: u64) {
        let now = self.now;
        let node = self.node_mut(id);
        if node.generation != generation || node.state != MacState::Deferring {
            return;
        }
        node.deferred_until_us = now;
        self.contend(id);
    }

    fn start_data(&mut self, id: NodeId) -> Result<(), SimError> {
        let node = self.node_mut(id);
        let frame = *node.head().expect("contending node has a frame");
        node.state = MacState::Transmitting;
        self.transmit(frame)
    }

    fn on_ack_start(&mut self, id: NodeId, ack_for: Option<TxId>) -> Result<(), SimError> {
        let Some(data_tx) = ack_for else {
            return self.start_data(id);
        };
        let Some((src, flow, seq)) = self.pending_ack(data_tx) else {
            return Ok(());
        };
        let frame = Frame {
            src: id,
            dst: src,
            payload_bytes: 0,
            tx_power_dbm: self.config.phy.tx_power_dbm,
            rate: self.config.phy.control_rate,
            is_ack: true,
            flow,
            seq,
        };
        self.transmit(frame)
    }

    fn pending_ack(&mut self, data_tx: TxId) -> Option<(NodeId, u32, u64)> {
        self.txs
            .remove(&(data_tx | ACK_MARK))
            .map(|t| (t.frame.src, t.frame.flow, t.frame.seq))
    }

    fn transmit(&mut self, frame: Frame) -> Result<(), SimError> {
        let duration = airtime(&frame, &self.config.phy.params, self.config.phy.mtu_bytes)?;
        let prop = self.chain.propagate(&frame, self.now);
        if let Some(decision) = prop.interference {
            self.log(frame.dst, Mechanism::Receiver, decision);
        }
        let id = self.next_tx;
        self.next_tx += 1;
        let collided = !self.on_air.is_empty();
        if collided {
            for other in &self.on_air {
                if let Some(t) = self.txs.get_mut(other) {
                    t.corrupted = true;
                }
            }
        } else {
            let (now, params) = (self.now, self.config.phy.params);
            for node in &mut self.nodes {
                if node.state == MacState::Contending {
                    node.freeze(now, &params);
                }
            }
        }
        self.on_air.push(id);
        self.txs.insert(
            id,
            Transmission {
                frame,
                corrupted: collided,
                rx_power_dbm: prop.rx_power_dbm,
            },
        );
        if let Some(s) = &mut self.survey {
            s.tx_start(frame.src, self.now);
        }
        self.events.schedule(self.now + duration, EventKind::TxEnd { tx: id });
        Ok(())
    }

    fn on_tx_end(&mut self, tx: TxId) {
        self.on_air.retain(|&t| t != tx);
        let frame = self.txs[&tx].frame;
        if let Some(s) = &mut self.survey {
            s.tx_end(frame.src, self.now);
        }
        let delay = self.config.phy.propagation_delay_us;
        if !frame.is_ack {
            let timeout = self.config.phy.params.ack_timeout_us(self.config.phy.control_rate) + 2 * delay;
            let now = self.now;
            let node = self.node_mut(frame.src);
            node.state = MacState::AwaitingAck;
            node.ack_generation += 1;
            let generation = node.ack_generation;
            self.events
                .schedule(now + timeout, EventKind::AckTimeout { node: frame.src, generation });
        }
        self.events.schedule(self.now + delay, EventKind::RxDecide { tx });
        if self.on_air.is_empty() {
            self.idle_since = self.now;
            let waiting: Vec<NodeId> = self
                .nodes
                .iter()
                .filter(|n| n.state == MacState::Contending && n.countdown.is_none())
                .map(|n| n.id)
                .collect();
            for id in waiting {
                self.try_access(id);
            }
        }
    }

    fn on_rx_decide(&mut self, tx: TxId) {
        let Some(t) = self.txs.remove(&tx) else { return };
        let phy = &self.config.phy;
        let ok = !t.corrupted && decode(t.rx_power_dbm, t.frame.rate, phy.noise_floor_dbm, &phy.thresholds);
        if !ok {
            return;
        }
        let frame = t.frame;
        if frame.is_ack {
            self.on_ack_received(frame);
            return;
        }
        let now = self.now;
        let rx = self.node_mut(frame.dst);
        let fresh = rx.delivered_seq.get(&frame.flow).is_none_or(|&last| frame.seq > last);
        if fresh {
            rx.delivered_seq.insert(frame.flow, frame.seq);
            self.deliveries.push(Delivery {
                time_us: now,
                flow: frame.flow,
                payload_bytes: frame.payload_bytes,
            });
            self.flows[self.flow_index[&frame.flow]].stats.delivered += 1;
        }
        // keep the data frame around until the ACK goes out
        self.txs.insert(tx | ACK_MARK, t);
        let sifs = self.config.phy.params.sifs_us;
        self.events.schedule(
            now + sifs,
            EventKind::TxStart { node: frame.dst, ack_for: Some(tx) },
        );
    }

    fn on_ack_received(&mut self, ack: Frame) {
        let params = self.config.phy.params;
        let node = self.node_mut(ack.dst);
        let matches_head = node.head().is_some_and(|h| h.flow == ack.flow && h.seq == ack.seq);
        if node.state != MacState::AwaitingAck || !matches_head {
            return;
        }
        node.ack_generation += 1;
        node.on_ack(&params);
        let frame = node.queue.pop_front().expect("head checked above");
        self.flows[self.flow_index[&frame.flow]].stats.acked += 1;
        self.refill(frame.flow);
        self.contend(ack.dst);
    }

    fn on_ack_timeout(&mut self, id: NodeId, generation: u64) {
        let params = self.config.phy.params;
        let node = self.node_mut(id);
        if node.ack_generation != generation || node.state != MacState::AwaitingAck {
            return;
        }
        if node.on_missing_ack(&params) == RetryOutcome::Dropped {
            let frame = node.queue.pop_front().expect("awaiting ack for the head frame");
            self.flows[self.flow_index[&frame.flow]].stats.dropped_retry += 1;
            self.refill(frame.flow);
        }
        self.contend(id);
    }

    fn log(&mut self, node: NodeId, mechanism: Mechanism, decision: GateDecision) {
        if self.config.record_decisions {
            self.decisions.push(GateRecord {
                time_us: self.now,
                node,
                mechanism,
                decision,
            });
        }
    }
}

/// Marks a received data frame parked until its ACK is sent.
const ACK_MARK: TxId = 1 << 63;
