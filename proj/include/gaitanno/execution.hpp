#pragma once

namespace gaitanno {

// Selects the serial reference kernel or its OpenMP counterpart.
enum class Execution { Serial, Parallel };

}  // namespace gaitanno
