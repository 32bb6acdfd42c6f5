#pragma once

#include "sis/action.hpp"
#include "sis/error.hpp"
#include "sis/generator.hpp"
#include "sis/group.hpp"
#include "sis/oracle.hpp"
#include "sis/parallel.hpp"
#include "sis/range.hpp"
#include "sis/sizf.hpp"
#include "sis/space.hpp"
#include "sis/transform.hpp"
