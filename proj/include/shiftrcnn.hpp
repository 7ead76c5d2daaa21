// Copyright 2026 The shiftrcnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "shiftrcnn/augment.hpp"
#include "shiftrcnn/dataset.hpp"
#include "shiftrcnn/error.hpp"
#include "shiftrcnn/eval.hpp"
#include "shiftrcnn/geometry.hpp"
#include "shiftrcnn/kitti_io.hpp"
#include "shiftrcnn/lift.hpp"
#include "shiftrcnn/losses.hpp"
#include "shiftrcnn/pipeline.hpp"
#include "shiftrcnn/shiftnet.hpp"
#include "shiftrcnn/synthetic.hpp"
