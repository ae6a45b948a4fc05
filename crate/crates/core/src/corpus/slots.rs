use serde::{Deserialize, Serialize};

use super::Stanza;
use crate::error::{Error, Result};

/// Half-open year interval `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeSlot {
    pub start: i32,
    pub end: i32,
    pub label: String,
}

impl TimeSlot {
    pub fn new(start: i32, end: i32) -> Self {
        TimeSlot {
            start,
            end,
            label: format!("{start}-{end}"),
        }
    }

    pub fn contains(&self, year: i32) -> bool {
        self.start <= year && year < self.end
    }

    pub fn width(&self) -> i32 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeSlotTable {
    pub slots: Vec<TimeSlot>,
    pub step_years: i32,
    pub window_years: i32,
}

impl TimeSlotTable {
    /// Rebuilds a table from raw `(start, end)` bounds, e.g. when loading a model.
    pub fn from_bounds(bounds: &[(i32, i32)]) -> Result<Self> {
        if bounds.len() < 2 {
            return Err(Error::InvalidSlotting(format!(
                "need at least 2 slots, got {}",
                bounds.len()
            )));
        }
        for w in bounds.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidSlotting("slot starts must increase".into()));
            }
        }
        if bounds.iter().any(|(s, e)| e <= s) {
            return Err(Error::InvalidSlotting("empty slot".into()));
        }
        let step_years = bounds.windows(2).map(|w| w[1].0 - w[0].0).min().unwrap();
        let window_years = bounds.iter().map(|(s, e)| e - s).min().unwrap();
        Ok(TimeSlotTable {
            slots: bounds.iter().map(|&(s, e)| TimeSlot::new(s, e)).collect(),
            step_years,
            window_years,
        })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn is_sliding(&self) -> bool {
        self.step_years < self.window_years
    }

    pub fn starts(&self) -> Vec<i32> {
        self.slots.iter().map(|s| s.start).collect()
    }

    /// Indices of every slot whose interval contains `year`.
    pub fn slots_containing(&self, year: i32) -> impl Iterator<Item = usize> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.contains(year))
            .map(|(i, _)| i)
    }
}

/// Builds fixed (`step == window`) or sliding (`step < window`) slots over `[start, end)`.
///
/// A trailing remainder shorter than one step is absorbed into the last slot.
/// `merge_first` folds the first two slots of a fixed table into one.
pub fn build_slots(
    start: i32,
    end: i32,
    window_years: i32,
    step_years: i32,
    merge_first: bool,
) -> Result<TimeSlotTable> {
    if end <= start {
        return Err(Error::InvalidSlotting(format!("empty range [{start}, {end})")));
    }
    if window_years <= 0 || step_years <= 0 || step_years > window_years {
        return Err(Error::InvalidSlotting(format!(
            "need 0 < step ({step_years}) <= window ({window_years})"
        )));
    }
    if merge_first && step_years != window_years {
        return Err(Error::InvalidSlotting(
            "merge_first only applies to fixed slotting".into(),
        ));
    }

    let mut slots = Vec::new();
    let mut s = start;
    while s + window_years <= end {
        slots.push(TimeSlot::new(s, s + window_years));
        s += step_years;
    }
    if let Some(last) = slots.last_mut() {
        if last.end < end {
            *last = TimeSlot::new(last.start, end);
        }
    }
    if merge_first && slots.len() >= 2 {
        let second = slots.remove(1);
        slots[0] = TimeSlot::new(slots[0].start, second.end);
    }
    if slots.len() < 2 {
        return Err(Error::InvalidSlotting(format!(
            "range [{start}, {end}) yields {} slot(s); need at least 2",
            slots.len()
        )));
    }
    Ok(TimeSlotTable {
        slots,
        step_years,
        window_years,
    })
}

/// Stanza indices per slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotAssignment {
    pub per_slot: Vec<Vec<usize>>,
    /// Stanzas outside every slot.
    pub dropped: usize,
}

impl SlotAssignment {
    pub fn assigned_stanzas(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.per_slot.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

pub fn assign(stanzas: &[Stanza], table: &TimeSlotTable) -> SlotAssignment {
    let mut per_slot = vec![Vec::new(); table.len()];
    let mut dropped = 0;
    for (i, s) in stanzas.iter().enumerate() {
        let mut placed = false;
        for slot in table.slots_containing(s.year) {
            per_slot[slot].push(i);
            placed = true;
        }
        if !placed {
            dropped += 1;
        }
    }
    if dropped > 0 {
        log::info!("{dropped} stanza(s) fall outside every time slot");
    }
    SlotAssignment { per_slot, dropped }
}
