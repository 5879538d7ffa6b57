/* Copyright 2026 The wemeval Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef WEMEVAL_TESTS_SANITIZE_CASES_H_
#define WEMEVAL_TESTS_SANITIZE_CASES_H_

#include <string_view>

namespace wemeval::testing {

struct SanitizeCase {
  std::string_view input;
  std::string_view expected;
};

// Trailing tokens of four or more ASCII letters without a, e, i, o or u are
// garbage; everything else is kept.
inline constexpr SanitizeCase kSanitizeCases[] = {
    {"pick_up_plate_zxcv", "pick_up_plate"},
    {"grasp", "grasp"},
    {"open_drawer", "open_drawer"},
    {"", ""},
    {"zxcv", ""},
    {"pick_up_plate_zxcv_qwrt", "pick_up_plate"},
    {"move_forward_xyz", "move_forward_xyz"},
    {"turn_left_bcdfg", "turn_left"},
    {"dance_rhythm", "dance"},
    {"ZXCV", ""},
    {"open_ZXCV", "open"},
    {"open_drawer_zx1v", "open_drawer_zx1v"},
    {"pick up plate zxcv", "pick up plate"},
    {"pick  up\tzxcv", "pick  up"},
    {"zxcv_open", "zxcv_open"},
    {"open_drawer_", "open_drawer_"},
    {"open_drawer_zxcv_", "open_drawer"},
    {"place_cup_QWRT", "place_cup"},
    {"stack_blocks_Zxcv", "stack_blocks"},
    {"go_brrr", "go"},
    {"go_brr", "go_brr"},
    {"push_button_aaaa", "push_button_aaaa"},
    {"push_button_kkkk", "push_button"},
    {"x", "x"},
    {"nth", "nth"},
    {"hmmm", ""},
    {"wipe_table_tsktsk", "wipe_table"},
    {"open_the_door_mnbv_lkjh", "open_the_door"},
    {"open_mnbv_the_door", "open_mnbv_the_door"},
    {"pour_water_pqrstv", "pour_water"},
    {"close_lid_glyph", "close_lid"},
    {"close_lid_crypt", "close_lid"},
    {"fold_towel_xyz1", "fold_towel_xyz1"},
    {"fold_towel_xy-z", "fold_towel_xy-z"},
    {"navigate_to_kitchen", "navigate_to_kitchen"},
    {"   ", "   "},
    {"pick_up_plate zxcv", "pick_up_plate"},
    {"PICK_UP_PLATE_ZXCV", "PICK_UP_PLATE"},
    {"turn_right_15_degrees", "turn_right_15_degrees"},
    {"turn_right_bbbb_cccc_dddd", "turn_right"},
    {"a_bcdf", "a"},
    {"bcdf_a", "bcdf_a"},
    {"move_back_sdfg_a", "move_back_sdfg_a"},
    {"rotate_wrist_WXYZ", "rotate_wrist"},
    {"rotate_wrist_wxy", "rotate_wrist_wxy"},
    {"lift_box_qqqqqqqqqq", "lift_box"},
    {"lift_box_\tqqqq", "lift_box"},
    {"sort_items_ptkq_done", "sort_items_ptkq_done"},
    {"walk_forward_sky", "walk_forward_sky"},
    {"walk_forward_skyy", "walk_forward"},
};

}  // namespace wemeval::testing

#endif  // WEMEVAL_TESTS_SANITIZE_CASES_H_
