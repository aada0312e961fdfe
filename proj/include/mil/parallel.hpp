#pragma once

namespace mil::parallel {

/// Sets the worker count used by the parallel kernel variants. n < 1 resets
/// to the hardware default. Affects subsequent kernel dispatches only.
void set_workers(int n);

/// Current worker count (>= 1).
int workers();

/// True when parallel kernel variants are selected (workers() > 1).
bool enabled();

/// Worker count the hardware suggests.
int hardware_workers();

}  // namespace mil::parallel
