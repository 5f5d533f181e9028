#pragma once

#include <absim/scheme.hpp>

namespace absim {

/// The four shipped experiment presets. Mesh layouts and slot positions are
/// best-effort transcriptions of the device drawings and are marked
/// provisional in the emitted JSON; the physics downstream holds for any
/// consistent layout.

/// [6,2,2,3]: two photons in six modes, one detected over three adaptive
/// modes, dual-rail qubit on the last two rails, cascaded pi/2 rule.
AbsScheme platform_a();

/// [8,3,2,15]: three photons in eight modes, two detected over six adaptive
/// modes, cascaded pi/2 rule over five slots.
AbsScheme platform_b1();

/// [8,3,2,15]: fixed random 8-mode stage plus a single two-mode adaptive
/// cell driven by the pair-position ramp rule.
AbsScheme platform_b2();

/// [8,3,3,15]: qutrit variant with bunched outcomes allowed and a two-cell
/// three-mode adaptive stage.
AbsScheme platform_b3();

std::vector<AbsScheme> all_presets();

}  // namespace absim
