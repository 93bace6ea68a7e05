/* The public header must compile as C. */
#include <stdio.h>
#include <string.h>

#include "dcmsg/dcmsg.h"

int main(void) {
  dcm_dataset* data = NULL;
  char* info = NULL;
  if (dcm_dataset_generate("{\"n_individuals\": 10}", &data) != DCM_OK) return 1;
  if (dcm_dataset_describe(data, &info) != DCM_OK) return 1;
  if (!strstr(info, "\"n_individuals\":10")) return 1;
  dcm_string_free(info);
  dcm_dataset_free(data);
  if (dcm_dataset_load("/nonexistent.csv", &data) != DCM_IO) return 1;
  printf("%s: %s\n", dcm_status_name(DCM_IO), dcm_last_error());
  return 0;
}
