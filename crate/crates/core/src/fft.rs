//! Per-thread cache of FFT plans keyed by scalar type, length and direction.

use std::any::{Any, TypeId};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use rustfft::{Fft, FftDirection, FftPlanner};

use crate::scalar::Real;

type PlanKey = (TypeId, usize, bool);

thread_local! {
    static PLANS: RefCell<HashMap<PlanKey, Box<dyn Any>>> = RefCell::new(HashMap::new());
}

pub(crate) fn plan<T: Real>(len: usize, direction: FftDirection) -> Arc<dyn Fft<T>> {
    let key = (TypeId::of::<T>(), len, direction == FftDirection::Forward);
    PLANS.with(|cell| {
        let mut map = cell.borrow_mut();
        let entry = map.entry(key).or_insert_with(|| {
            let mut planner = FftPlanner::<T>::new();
            Box::new(planner.plan_fft(len, direction))
        });
        entry
            .downcast_ref::<Arc<dyn Fft<T>>>()
            .expect("plan cache keyed by type id")
            .clone()
    })
}
