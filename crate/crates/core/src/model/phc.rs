//! Event-driven implementation of the facility.
//!
//! Each patient visit is an entity carrying a precomputed route of resource
//! seizures and delays. All random draws for a visit are taken when it is
//! created, each process from its own stream, so scenarios that differ in
//! one parameter keep every other draw in step.
//!
//! Childbirth is the one pathway with parallel activity: the labour bed, the
//! staff nurse and (inside OPD hours) the doctor are engaged together at
//! admission. The nurse and doctor parts run as child entities.

use std::collections::{HashMap, VecDeque};

use super::config::{AdminAssignee, BedFullPolicy, FollowupBookkeeping, ModelMode, PhcConfiguration};
use super::outcome::{Diagnostics, FlowCount, FlowCounts, ReplicationOutcome};
use super::patient::{Disposition, PatientClass, PatientRecord, Resource, Stamp, TraceEvent, TraceRecord};
use super::ModelError;
use crate::kernel::{
    Acquire, Calendar, DistributionSpec, Horizon, Model, PriorityResource, RandomStream, SimEvent, Tally, Tier,
    MINUTES_PER_DAY,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Action {
    OpdArrival,
    OutpatientVisit { age_30_plus: bool, visit_index: u8, remaining: u8 },
    IpdArrival,
    ChildbirthArrival,
    AncArrival,
    AncVisit { visit_index: u8 },
    Done { id: u64, resource: Resource },
    DelayDone { id: u64 },
    Renege { id: u64 },
    DayOpen,
    ShiftStart,
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Seize { resource: Resource, tier: Tier, service: f64 },
    Delay(f64),
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    resource: Resource,
    service: f64,
    queued: f64,
}

#[derive(Debug, Clone, Copy)]
struct LabourPlan {
    stay: f64,
    nurse: f64,
    doctor: f64,
}

#[derive(Debug)]
struct Entity {
    record: PatientRecord,
    route: VecDeque<Step>,
    pending: Option<Pending>,
    labour: Option<LabourPlan>,
    /// Counted in the flow balance (false for admin and child entities).
    counted: bool,
    /// Arrived (or, for child entities, was created) inside OPD hours.
    in_window: bool,
}

struct Streams {
    opd_arrival: RandomStream,
    opd_triage: RandomStream,
    opd_followup: RandomStream,
    ncd: RandomStream,
    consult: RandomStream,
    lab: RandomStream,
    report_delay: RandomStream,
    pharmacy: RandomStream,
    ipd_arrival: RandomStream,
    doctor_inpatient: RandomStream,
    nurse_inpatient: RandomStream,
    inpatient_bed: RandomStream,
    cb_arrival: RandomStream,
    labour_bed: RandomStream,
    nurse_childbirth: RandomStream,
    doctor_childbirth: RandomStream,
    cb_mix: RandomStream,
    post_delivery: RandomStream,
    anc_arrival: RandomStream,
    anc_gap: RandomStream,
    anc_nurse: RandomStream,
    anc_lab: RandomStream,
    anc_pharmacy: RandomStream,
    doctor_admin: RandomStream,
    ncd_admin: RandomStream,
}

impl Streams {
    fn new(seed: u64) -> Self {
        let s = |label: &str| RandomStream::new(seed, label);
        Self {
            opd_arrival: s("opd.arrival"),
            opd_triage: s("opd.triage"),
            opd_followup: s("opd.followup"),
            ncd: s("svc.ncd_check"),
            consult: s("svc.doctor_opd"),
            lab: s("svc.lab"),
            report_delay: s("svc.lab_report_delay"),
            pharmacy: s("svc.pharmacy"),
            ipd_arrival: s("ipd.arrival"),
            doctor_inpatient: s("svc.doctor_inpatient"),
            nurse_inpatient: s("svc.nurse_inpatient"),
            inpatient_bed: s("svc.inpatient_bed"),
            cb_arrival: s("childbirth.arrival"),
            labour_bed: s("svc.labour_bed"),
            nurse_childbirth: s("svc.nurse_childbirth"),
            doctor_childbirth: s("svc.doctor_childbirth"),
            cb_mix: s("childbirth.mix"),
            post_delivery: s("svc.post_delivery_bed"),
            anc_arrival: s("anc.arrival"),
            anc_gap: s("anc.gap"),
            anc_nurse: s("svc.anc_nurse"),
            anc_lab: s("anc.lab"),
            anc_pharmacy: s("anc.pharmacy"),
            doctor_admin: s("admin.doctor"),
            ncd_admin: s("admin.ncd"),
        }
    }
}

/// Result of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct PhcRun {
    pub outcome: ReplicationOutcome,
    pub trace: Option<Vec<TraceRecord>>,
    /// Finished patient records, kept only when tracing.
    pub records: Option<Vec<PatientRecord>>,
}

pub struct PhcModel {
    cfg: PhcConfiguration,
    seed: u64,
    horizon: Horizon,
    streams: Streams,
    doctor: PriorityResource<u64>,
    ncd: PriorityResource<u64>,
    nurse: PriorityResource<u64>,
    pharmacy: PriorityResource<u64>,
    lab: PriorityResource<u64>,
    inpatient_bed: PriorityResource<u64>,
    labour_bed: PriorityResource<u64>,
    entities: HashMap<u64, Entity>,
    next_id: u64,
    opd_clock: f64,
    anc_clock: f64,
    stats_start: f64,
    opd_wait: Tally,
    pharmacy_wait: Tally,
    lab_wait: Tally,
    visits: u64,
    admitted: u64,
    referred: u64,
    flow: FlowCounts,
    max_admitted_wait: f64,
    min_referred_wait: Option<f64>,
    out_of_window_starts: u64,
    doctor_sampled: f64,
    trace: Option<Vec<TraceRecord>>,
    records: Option<Vec<PatientRecord>>,
}

impl PhcModel {
    pub fn new(cfg: &PhcConfiguration, seed: u64, horizon: Horizon, tracing: bool) -> Result<Self, ModelError> {
        cfg.validate()?;
        let pool = |name: &str, n: u32| PriorityResource::new(name, n.max(1));
        Ok(Self {
            seed,
            horizon,
            streams: Streams::new(seed),
            doctor: pool("doctor", cfg.n_doctors)?,
            ncd: pool("ncd_nurse", 1)?,
            nurse: pool("staff_nurse", 1)?,
            pharmacy: pool("pharmacy", 1)?,
            lab: pool("lab", 1)?,
            inpatient_bed: pool("inpatient_bed", cfg.n_inpatient_beds)?,
            labour_bed: pool("labour_bed", cfg.n_labour_beds)?,
            entities: HashMap::new(),
            next_id: 0,
            opd_clock: 0.0,
            anc_clock: 0.0,
            stats_start: 0.0,
            opd_wait: Tally::new(),
            pharmacy_wait: Tally::new(),
            lab_wait: Tally::new(),
            visits: 0,
            admitted: 0,
            referred: 0,
            flow: FlowCounts::default(),
            max_admitted_wait: 0.0,
            min_referred_wait: None,
            out_of_window_starts: 0,
            doctor_sampled: 0.0,
            trace: tracing.then(Vec::new),
            records: tracing.then(Vec::new),
            cfg: cfg.clone(),
        })
    }

    fn pool(&mut self, r: Resource) -> &mut PriorityResource<u64> {
        match r {
            Resource::Doctor => &mut self.doctor,
            Resource::NcdNurse => &mut self.ncd,
            Resource::StaffNurse => &mut self.nurse,
            Resource::Pharmacy => &mut self.pharmacy,
            Resource::Lab => &mut self.lab,
            Resource::InpatientBed => &mut self.inpatient_bed,
            Resource::LabourBed => &mut self.labour_bed,
        }
    }

    fn flow_mut(&mut self, class: PatientClass) -> Option<&mut FlowCount> {
        match class {
            PatientClass::Outpatient => Some(&mut self.flow.outpatient),
            PatientClass::Inpatient => Some(&mut self.flow.inpatient),
            PatientClass::Childbirth => Some(&mut self.flow.childbirth),
            PatientClass::Anc => Some(&mut self.flow.anc),
            PatientClass::Admin => None,
        }
    }

    fn log(&mut self, time: f64, patient: u64, class: PatientClass, resource: Option<Resource>, event: TraceEvent) {
        if let Some(t) = self.trace.as_mut() {
            t.push(TraceRecord {
                time,
                patient,
                class,
                resource,
                event,
            });
        }
    }

    fn spawn(
        &mut self,
        now: f64,
        class: PatientClass,
        route: VecDeque<Step>,
        counted: bool,
        age_30_plus: bool,
        visit_index: u8,
    ) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        let in_window = self.cfg.opd_window.is_open(now);
        self.entities.insert(
            id,
            Entity {
                record: PatientRecord {
                    id,
                    class,
                    age_30_plus,
                    visit_index,
                    arrival_time: now,
                    stamps: Vec::new(),
                    departure_time: None,
                    disposition: None,
                },
                route,
                pending: None,
                labour: None,
                counted,
                in_window,
            },
        );
        if counted {
            if let Some(f) = self.flow_mut(class) {
                f.arrived += 1;
            }
            self.log(now, id, class, None, TraceEvent::Arrive);
        }
        id
    }

    fn advance(&mut self, id: u64, now: f64, cal: &mut Calendar<Action>) -> Result<(), ModelError> {
        let ent = self.entities.get_mut(&id).expect("live entity");
        let class = ent.record.class;
        let step = ent.route.pop_front();
        match step {
            None => self.depart(id, now, Disposition::Completed),
            Some(Step::Delay(d)) => {
                self.log(now, id, class, None, TraceEvent::Delay);
                cal.schedule(now + d, Action::DelayDone { id })?;
            }
            Some(Step::Seize { resource, tier, service }) => {
                if resource == Resource::InpatientBed
                    && class == PatientClass::Inpatient
                    && self.cfg.inpatient_bed_full == BedFullPolicy::Refer
                    && self.inpatient_bed.in_service() >= self.inpatient_bed.capacity() as usize
                {
                    self.log(now, id, class, Some(resource), TraceEvent::Referred);
                    self.depart(id, now, Disposition::ReferredOut);
                    return Ok(());
                }
                self.entities.get_mut(&id).expect("live entity").pending = Some(Pending {
                    resource,
                    service,
                    queued: now,
                });
                match self.pool(resource).acquire(now, id, tier)? {
                    Acquire::Granted => self.start(id, now, cal)?,
                    Acquire::Queued { .. } => self.log(now, id, class, Some(resource), TraceEvent::Queue),
                }
            }
        }
        Ok(())
    }

    /// Begin the pending service of `id`, which now holds its resource.
    fn start(&mut self, id: u64, now: f64, cal: &mut Calendar<Action>) -> Result<(), ModelError> {
        let ent = self.entities.get_mut(&id).expect("live entity");
        let p = ent.pending.take().expect("pending service");
        let class = ent.record.class;
        ent.record.stamps.push(Stamp {
            resource: p.resource,
            queued: p.queued,
            started: now,
            ended: now + p.service,
        });
        let in_window = ent.in_window;
        let wait = now - p.queued;
        if class != PatientClass::Admin {
            match p.resource {
                Resource::Doctor if class == PatientClass::Outpatient => self.opd_wait.record(wait),
                Resource::Pharmacy => self.pharmacy_wait.record(wait),
                Resource::Lab => self.lab_wait.record(wait),
                _ => {}
            }
            if p.resource.windowed() && !in_window {
                self.out_of_window_starts += 1;
            }
        }
        if p.resource == Resource::Doctor {
            let lo = now.max(self.horizon.warmup_end());
            let hi = (now + p.service).min(self.horizon.end());
            self.doctor_sampled += (hi - lo).max(0.0);
        }
        self.log(now, id, class, Some(p.resource), TraceEvent::Start);
        cal.schedule(
            now + p.service,
            Action::Done {
                id,
                resource: p.resource,
            },
        )?;
        Ok(())
    }

    fn depart(&mut self, id: u64, now: f64, disposition: Disposition) {
        let mut ent = self.entities.remove(&id).expect("live entity");
        let class = ent.record.class;
        if ent.counted {
            let f = self.flow_mut(class).expect("patient class");
            match disposition {
                Disposition::Completed => f.completed += 1,
                Disposition::ReferredOut => f.referred += 1,
            }
            self.log(now, id, class, None, TraceEvent::Depart);
        }
        if let Some(r) = self.records.as_mut() {
            if ent.counted {
                ent.record.departure_time = Some(now);
                ent.record.disposition = Some(disposition);
                r.push(ent.record);
            }
        }
    }

    fn schedule_opd_arrival(&mut self, cal: &mut Calendar<Action>) -> Result<(), ModelError> {
        let iat = self.cfg.opd_interarrival_mean;
        if iat.is_finite() {
            self.opd_clock += DistributionSpec::exponential(iat).sample(&mut self.streams.opd_arrival);
            cal.schedule(self.cfg.opd_window.open_time_to_calendar(self.opd_clock), Action::OpdArrival)?;
        }
        Ok(())
    }

    fn schedule_anc_arrival(&mut self, cal: &mut Calendar<Action>) -> Result<(), ModelError> {
        if let Some(iat) = self.cfg.anc_interarrival_mean.filter(|m| m.is_finite()) {
            // Calendar-time rate, realised on the OPD clock.
            let mean = iat * self.cfg.opd_window.window_minutes() / MINUTES_PER_DAY;
            self.anc_clock += DistributionSpec::exponential(mean).sample(&mut self.streams.anc_arrival);
            cal.schedule(self.cfg.opd_window.open_time_to_calendar(self.anc_clock), Action::AncArrival)?;
        }
        Ok(())
    }

    fn schedule_calendar_arrival(
        stream: &mut RandomStream,
        iat: Option<f64>,
        action: Action,
        cal: &mut Calendar<Action>,
    ) -> Result<(), ModelError> {
        if let Some(iat) = iat.filter(|m| m.is_finite()) {
            cal.schedule_in(DistributionSpec::exponential(iat).sample(stream), action)?;
        }
        Ok(())
    }

    fn followups(&mut self) -> u8 {
        let u = self.streams.opd_followup.uniform01();
        if self.cfg.mode == ModelMode::Validation {
            return 0;
        }
        let (p2, p3) = (self.cfg.p_followup_two_visits, self.cfg.p_followup_three_visits);
        let at_least_one = match self.cfg.followup_bookkeeping {
            FollowupBookkeeping::Nested => p2,
            FollowupBookkeeping::Exclusive => p2 + p3,
        };
        if u < p3 {
            2
        } else if u < at_least_one {
            1
        } else {
            0
        }
    }

    fn outpatient_visit(
        &mut self,
        now: f64,
        age_30_plus: bool,
        visit_index: u8,
        remaining: u8,
        cal: &mut Calendar<Action>,
    ) -> Result<(), ModelError> {
        let (lo, hi) = self.cfg.followup_gap_days;
        let gap = self.streams.opd_followup.int_inclusive(lo, hi);
        if remaining > 0 {
            cal.schedule(
                now + gap as f64 * MINUTES_PER_DAY,
                Action::OutpatientVisit {
                    age_30_plus,
                    visit_index: visit_index + 1,
                    remaining: remaining - 1,
                },
            )?;
        }

        let s = &mut self.streams;
        let svc = &self.cfg.services;
        let to_lab = s.opd_triage.chance(self.cfg.p_lab_referral);
        let point_of_care = s.opd_triage.chance(self.cfg.p_lab_point_of_care);
        let assisted = s.opd_triage.chance(self.cfg.ncd_assist_fraction);
        let ncd = svc.ncd_check.sample(&mut s.ncd);
        let consult = svc.doctor_opd.sample(&mut s.consult);
        let lab = svc.lab.sample(&mut s.lab);
        let delay = svc.lab_report_delay.sample(&mut s.report_delay);
        let pharmacy = svc.pharmacy.sample(&mut s.pharmacy);

        let seize = |resource, service| Step::Seize {
            resource,
            tier: Tier::Low,
            service,
        };
        let mut route = VecDeque::with_capacity(6);
        if age_30_plus {
            let who = if assisted { Resource::StaffNurse } else { Resource::NcdNurse };
            route.push_back(seize(who, ncd));
        }
        if to_lab {
            // The first touch only routes the patient to the lab.
            route.push_back(seize(Resource::Doctor, 0.0));
            route.push_back(seize(Resource::Lab, lab));
            if point_of_care {
                route.push_back(Step::Delay(delay));
                route.push_back(seize(Resource::Doctor, consult));
            }
        } else {
            route.push_back(seize(Resource::Doctor, consult));
        }
        route.push_back(seize(Resource::Pharmacy, pharmacy));

        self.visits += 1;
        let id = self.spawn(now, PatientClass::Outpatient, route, true, age_30_plus, visit_index);
        self.advance(id, now, cal)
    }

    fn inpatient_arrival(&mut self, now: f64, cal: &mut Calendar<Action>) -> Result<(), ModelError> {
        let s = &mut self.streams;
        let svc = &self.cfg.services;
        let doctor = svc.doctor_inpatient.sample(&mut s.doctor_inpatient);
        let nurse = svc.nurse_inpatient.sample(&mut s.nurse_inpatient);
        let stay = svc.inpatient_bed.sample(&mut s.inpatient_bed);
        let mut route = VecDeque::with_capacity(3);
        if self.cfg.opd_window.is_open(now) {
            route.push_back(Step::Seize {
                resource: Resource::Doctor,
                tier: Tier::High,
                service: doctor,
            });
        }
        route.push_back(Step::Seize {
            resource: Resource::StaffNurse,
            tier: Tier::High,
            service: nurse,
        });
        route.push_back(Step::Seize {
            resource: Resource::InpatientBed,
            tier: Tier::Low,
            service: stay,
        });
        let id = self.spawn(now, PatientClass::Inpatient, route, true, false, 1);
        self.advance(id, now, cal)
    }

    fn childbirth_arrival(&mut self, now: f64, cal: &mut Calendar<Action>) -> Result<(), ModelError> {
        let s = &mut self.streams;
        let svc = &self.cfg.services;
        let stay = svc.labour_bed.sample(&mut s.labour_bed);
        let nurse = svc.nurse_childbirth.sample(&mut s.nurse_childbirth);
        let mut doctor = svc.doctor_childbirth.sample(&mut s.doctor_childbirth);
        let u = s.cb_mix.uniform01();
        if let Some(mix) = self.cfg.childbirth_mix {
            doctor *= if u < mix.none {
                0.0
            } else if u < mix.none + mix.one_third {
                1.0 / 3.0
            } else {
                1.0
            };
        }
        let post = svc.post_delivery_bed.sample(&mut s.post_delivery);
        let route = VecDeque::from([Step::Seize {
            resource: Resource::InpatientBed,
            tier: Tier::Low,
            service: post,
        }]);
        let id = self.spawn(now, PatientClass::Childbirth, route, true, false, 1);
        self.entities.get_mut(&id).expect("just spawned").labour = Some(LabourPlan { stay, nurse, doctor });
        match self.labour_bed.acquire(now, id, Tier::Low)? {
            Acquire::Granted => self.admit(id, now, cal)?,
            Acquire::Queued { .. } => {
                self.log(now, id, PatientClass::Childbirth, Some(Resource::LabourBed), TraceEvent::Queue);
                cal.schedule(now + self.cfg.referral_threshold, Action::Renege { id })?;
            }
        }
        Ok(())
    }

    fn admit(&mut self, id: u64, now: f64, cal: &mut Calendar<Action>) -> Result<(), ModelError> {
        let ent = self.entities.get_mut(&id).expect("live entity");
        let plan = ent.labour.take().expect("labour plan");
        let wait = now - ent.record.arrival_time;
        ent.record.stamps.push(Stamp {
            resource: Resource::LabourBed,
            queued: ent.record.arrival_time,
            started: now,
            ended: now + plan.stay,
        });
        self.max_admitted_wait = self.max_admitted_wait.max(wait);
        self.admitted += 1;
        self.log(now, id, PatientClass::Childbirth, Some(Resource::LabourBed), TraceEvent::Start);
        cal.schedule(
            now + plan.stay,
            Action::Done {
                id,
                resource: Resource::LabourBed,
            },
        )?;

        let nurse = VecDeque::from([Step::Seize {
            resource: Resource::StaffNurse,
            tier: Tier::High,
            service: plan.nurse,
        }]);
        let child = self.spawn(now, PatientClass::Childbirth, nurse, false, false, 1);
        self.advance(child, now, cal)?;
        if plan.doctor > 0.0 && self.cfg.opd_window.is_open(now) {
            let doctor = VecDeque::from([Step::Seize {
                resource: Resource::Doctor,
                tier: Tier::High,
                service: plan.doctor,
            }]);
            let child = self.spawn(now, PatientClass::Childbirth, doctor, false, false, 1);
            self.advance(child, now, cal)?;
        }
        Ok(())
    }

    fn renege(&mut self, id: u64, now: f64) {
        if let Some(wait) = self.labour_bed.cancel(now, id) {
            self.referred += 1;
            self.min_referred_wait = Some(self.min_referred_wait.map_or(wait, |m| m.min(wait)));
            self.log(now, id, PatientClass::Childbirth, Some(Resource::LabourBed), TraceEvent::Referred);
            self.depart(id, now, Disposition::ReferredOut);
        }
    }

    fn anc_visit(&mut self, now: f64, visit_index: u8, cal: &mut Calendar<Action>) -> Result<(), ModelError> {
        debug_assert!(u32::from(visit_index) <= self.cfg.anc_visits);
        let gap = self.cfg.anc_gap_days.sample(&mut self.streams.anc_gap).round().max(1.0);
        if u32::from(visit_index) < self.cfg.anc_visits {
            cal.schedule(
                now + gap * MINUTES_PER_DAY,
                Action::AncVisit {
                    visit_index: visit_index + 1,
                },
            )?;
        }
        let s = &mut self.streams;
        let svc = &self.cfg.services;
        let seize = |resource, service| Step::Seize {
            resource,
            tier: Tier::Low,
            service,
        };
        let route = VecDeque::from([
            seize(Resource::StaffNurse, svc.anc_nurse.sample(&mut s.anc_nurse)),
            seize(Resource::Lab, svc.lab.sample(&mut s.anc_lab)),
            seize(Resource::Pharmacy, svc.pharmacy.sample(&mut s.anc_pharmacy)),
        ]);
        let id = self.spawn(now, PatientClass::Anc, route, true, false, visit_index);
        self.advance(id, now, cal)
    }

    /// Queue `total` minutes of background work on `resource` in blocks.
    fn queue_admin(
        &mut self,
        now: f64,
        resource: Resource,
        total: f64,
        cal: &mut Calendar<Action>,
    ) -> Result<(), ModelError> {
        if total <= 0.0 {
            return Ok(());
        }
        let blocks = (total / self.cfg.admin_block_minutes).ceil().max(1.0);
        let each = total / blocks;
        for _ in 0..blocks as u64 {
            let route = VecDeque::from([Step::Seize {
                resource,
                tier: Tier::Background,
                service: each,
            }]);
            let id = self.spawn(now, PatientClass::Admin, route, false, false, 0);
            self.advance(id, now, cal)?;
        }
        Ok(())
    }

    fn day_open(&mut self, now: f64, cal: &mut Calendar<Action>) -> Result<(), ModelError> {
        cal.schedule(now + MINUTES_PER_DAY, Action::DayOpen)?;
        let doctor = self.cfg.doctor_admin_total.sample(&mut self.streams.doctor_admin);
        let ncd = self.cfg.ncd_admin_total.sample(&mut self.streams.ncd_admin);
        if self.cfg.mode == ModelMode::Validation {
            return Ok(());
        }
        let doctor_to = match self.cfg.doctor_admin_by {
            AdminAssignee::Owner => Resource::Doctor,
            AdminAssignee::StaffNurse => Resource::StaffNurse,
        };
        let ncd_to = match self.cfg.ncd_admin_by {
            AdminAssignee::Owner => Resource::NcdNurse,
            AdminAssignee::StaffNurse => Resource::StaffNurse,
        };
        self.queue_admin(now, doctor_to, doctor, cal)?;
        self.queue_admin(now, ncd_to, ncd, cal)
    }

    fn observed_days(&self, now: f64) -> f64 {
        (now - self.stats_start) / MINUTES_PER_DAY
    }
}

impl Model for PhcModel {
    type Action = Action;
    type Output = PhcRun;
    type Error = ModelError;

    fn start(&mut self, cal: &mut Calendar<Action>) -> Result<(), ModelError> {
        self.schedule_opd_arrival(cal)?;
        self.schedule_anc_arrival(cal)?;
        Self::schedule_calendar_arrival(
            &mut self.streams.ipd_arrival,
            Some(self.cfg.ipd_interarrival_mean),
            Action::IpdArrival,
            cal,
        )?;
        Self::schedule_calendar_arrival(
            &mut self.streams.cb_arrival,
            self.cfg.childbirth_interarrival_mean,
            Action::ChildbirthArrival,
            cal,
        )?;
        cal.schedule(self.cfg.opd_window.opening(0), Action::DayOpen)?;
        if self.cfg.mode == ModelMode::Full && self.cfg.nurse_admin_per_shift > 0.0 {
            for &t in &self.cfg.shift_starts {
                cal.schedule(t, Action::ShiftStart)?;
            }
        }
        Ok(())
    }

    fn handle(&mut self, ev: SimEvent<Action>, cal: &mut Calendar<Action>) -> Result<(), ModelError> {
        let now = ev.time;
        match ev.action {
            Action::OpdArrival => {
                self.schedule_opd_arrival(cal)?;
                let age = self.streams.opd_triage.chance(self.cfg.p_age_30_plus);
                let remaining = self.followups();
                self.outpatient_visit(now, age, 1, remaining, cal)?;
            }
            Action::OutpatientVisit {
                age_30_plus,
                visit_index,
                remaining,
            } => self.outpatient_visit(now, age_30_plus, visit_index, remaining, cal)?,
            Action::IpdArrival => {
                Self::schedule_calendar_arrival(
                    &mut self.streams.ipd_arrival,
                    Some(self.cfg.ipd_interarrival_mean),
                    Action::IpdArrival,
                    cal,
                )?;
                self.inpatient_arrival(now, cal)?;
            }
            Action::ChildbirthArrival => {
                Self::schedule_calendar_arrival(
                    &mut self.streams.cb_arrival,
                    self.cfg.childbirth_interarrival_mean,
                    Action::ChildbirthArrival,
                    cal,
                )?;
                self.childbirth_arrival(now, cal)?;
            }
            Action::AncArrival => {
                self.schedule_anc_arrival(cal)?;
                self.anc_visit(now, 1, cal)?;
            }
            Action::AncVisit { visit_index } => self.anc_visit(now, visit_index, cal)?,
            Action::Done { id, resource } => {
                let class = self.entities[&id].record.class;
                self.log(now, id, class, Some(resource), TraceEvent::End);
                if let Some(g) = self.pool(resource).release(now, id)? {
                    if resource == Resource::LabourBed {
                        self.admit(g.requester, now, cal)?;
                    } else {
                        self.start(g.requester, now, cal)?;
                    }
                }
                self.advance(id, now, cal)?;
            }
            Action::DelayDone { id } => self.advance(id, now, cal)?,
            Action::Renege { id } => self.renege(id, now),
            Action::DayOpen => self.day_open(now, cal)?,
            Action::ShiftStart => {
                cal.schedule(now + MINUTES_PER_DAY, Action::ShiftStart)?;
                self.queue_admin(now, Resource::StaffNurse, self.cfg.nurse_admin_per_shift, cal)?;
            }
        }
        Ok(())
    }

    fn reset_statistics(&mut self, now: f64) {
        for r in Resource::ALL {
            self.pool(r).reset_statistics(now);
        }
        self.opd_wait.reset();
        self.pharmacy_wait.reset();
        self.lab_wait.reset();
        self.visits = 0;
        self.admitted = 0;
        self.referred = 0;
        self.stats_start = now;
    }

    fn finish(mut self, now: f64) -> Result<PhcRun, ModelError> {
        let window = self.cfg.opd_window.scheduled_minutes(self.stats_start, now);
        let span = now - self.stats_start;
        let childbirth = self.cfg.childbirth_enabled();

        let mut in_system = FlowCounts::default();
        let mut stranded = 0;
        for e in self.entities.values().filter(|e| e.counted) {
            let c = match e.record.class {
                PatientClass::Outpatient => &mut in_system.outpatient,
                PatientClass::Inpatient => &mut in_system.inpatient,
                PatientClass::Childbirth => &mut in_system.childbirth,
                PatientClass::Anc => &mut in_system.anc,
                PatientClass::Admin => continue,
            };
            c.in_system += 1;
            if e.record.class == PatientClass::Outpatient && e.record.arrival_time < now - MINUTES_PER_DAY {
                stranded += 1;
            }
        }
        self.flow.outpatient.in_system = in_system.outpatient.in_system;
        self.flow.inpatient.in_system = in_system.inpatient.in_system;
        self.flow.childbirth.in_system = in_system.childbirth.in_system;
        self.flow.anc.in_system = in_system.anc.in_system;

        let decisions = self.admitted + self.referred;
        let outcome = ReplicationOutcome {
            seed: self.seed,
            doctor_utilization: self.doctor.utilization(now, window)?,
            ncd_nurse_utilization: self.ncd.utilization(now, window)?,
            staff_nurse_utilization: self.nurse.utilization(now, span)?,
            pharmacist_utilization: self.pharmacy.utilization(now, window)?,
            lab_utilization: self.lab.utilization(now, window)?,
            inpatient_bed_utilization: self.inpatient_bed.utilization(now, span)?,
            labour_bed_utilization: if childbirth {
                Some(self.labour_bed.utilization(now, span)?)
            } else {
                None
            },
            opd_queue_length: self.doctor.mean_queue_len(now),
            opd_wait: self.opd_wait.mean(),
            pharmacy_queue_length: self.pharmacy.mean_queue_len(now),
            pharmacy_wait: self.pharmacy_wait.mean(),
            lab_queue_length: self.lab.mean_queue_len(now),
            lab_wait: self.lab_wait.mean(),
            referral_fraction: childbirth.then(|| {
                if decisions > 0 {
                    self.referred as f64 / decisions as f64
                } else {
                    0.0
                }
            }),
            outpatient_visits_per_day: self.visits as f64 / self.observed_days(now),
            diagnostics: Diagnostics {
                flow: self.flow.clone(),
                max_admitted_labour_wait: self.max_admitted_wait,
                min_referred_labour_wait: self.min_referred_wait,
                out_of_window_starts: self.out_of_window_starts,
                stranded_outpatients: stranded,
                doctor_busy_minutes: self.doctor.busy_minutes(now),
                doctor_sampled_minutes: self.doctor_sampled,
            },
        };
        Ok(PhcRun {
            outcome,
            trace: self.trace,
            records: self.records,
        })
    }
}
