/* End-to-end exercise of the C surface: parse, solve, inspect, error paths. */
#include "nestline.h"

#include <assert.h>
#include <math.h>
#include <stdio.h>
#include <string.h>

static const char *TWO_SQUARES =
    "{ \"name\": \"two\", \"strip_width\": 1.0,"
    "  \"pieces\": [ { \"id\": \"sq\", \"count\": 2,"
    "                  \"vertices\": [[0,0],[1,0],[1,1],[0,1]] } ] }";

int main(void) {
    NestlineInstance *inst = NULL;
    assert(nestline_instance_parse_json(TWO_SQUARES, &inst) == NESTLINE_STATUS_OK);
    assert(nestline_instance_piece_count(inst) == 2);
    assert(nestline_instance_strip_width(inst) == 1.0);

    NestlineOptions opts;
    assert(nestline_options_default(&opts) == NESTLINE_STATUS_OK);
    opts.starts = 2;
    opts.bl_iterations = 20;
    opts.max_time_seconds = 30.0;

    NestlineSolution *sol = NULL;
    assert(nestline_solve(inst, &opts, &sol) == NESTLINE_STATUS_OK);
    double len = nestline_solution_length(sol);
    assert(fabs(len - 2.0) < 1e-3);
    assert(nestline_solution_piece_count(sol) == 2);
    assert(nestline_solution_feasible_starts(sol) >= 1);

    double tx = 0.0, ty = 0.0, theta = 0.0;
    assert(nestline_solution_placement(sol, 0, &tx, &ty, &theta) == NESTLINE_STATUS_OK);
    assert(nestline_solution_placement(sol, 2, &tx, &ty, &theta) ==
           NESTLINE_STATUS_INVALID_ARGUMENT);
    assert(strcmp(nestline_solution_piece_id(sol, 1), "sq#2") == 0);

    const char *layout = nestline_solution_layout_json(sol);
    assert(layout != NULL && strstr(layout, "\"length\"") != NULL);

    NestlineInstance *bad = NULL;
    assert(nestline_instance_parse_json("not json", &bad) == NESTLINE_STATUS_PARSE_ERROR);
    assert(strlen(nestline_last_error()) > 0);
    assert(nestline_instance_parse_json(NULL, &bad) == NESTLINE_STATUS_INVALID_ARGUMENT);
    assert(isnan(nestline_solution_length(NULL)));

    nestline_solution_free(sol);
    nestline_instance_free(inst);
    nestline_solution_free(NULL);
    nestline_instance_free(NULL);

    printf("c smoke ok: length %.4f\n", len);
    return 0;
}
