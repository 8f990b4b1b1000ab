"""Published benchmark figures emitted as reference columns in reports.

Reproduced numbers are printed side by side with these so a report reader
can tell how far a desk-scale run lands from the published results.  The
dataset key for the temperature series uses the NAB file spelling.
"""

# AUC on NAB aggregations: {dataset: {freq: value}}
AUTOAD_AUC = {
    "Twitter_volume_CRM": {"daily": 0.75267, "hourly": 0.87414},
    "Twitter_volume_FB": {"daily": 0.70909, "hourly": 0.76227},
    "Twitter_volume_GOOG": {"daily": 0.72889, "hourly": 0.76667},
    "nyc_taxi": {"daily": 0.65151, "hourly": 0.72483},
    "machine_temperature_system_failure": {"daily": 0.96787, "hourly": 0.99623},
    "cpu_utilization_asg_misconfiguration": {"daily": 0.72667, "hourly": 0.44167},
}

AUTOAD_RETUNES = {
    "Twitter_volume_CRM": {"daily": 3, "hourly": 4},
    "Twitter_volume_FB": {"daily": 1, "hourly": 3},
    "Twitter_volume_GOOG": {"daily": 3, "hourly": 3},
    "nyc_taxi": {"daily": 3, "hourly": 5},
    "machine_temperature_system_failure": {"daily": 2, "hourly": 3},
    "cpu_utilization_asg_misconfiguration": {"daily": 3, "hourly": 3},
}

PROPHET_AUC = {
    "Twitter_volume_CRM": {"daily": 0.67287, "hourly": 0.64670},
    "Twitter_volume_FB": {"daily": 0.43889, "hourly": 0.65513},
    "Twitter_volume_GOOG": {"daily": 0.66433, "hourly": 0.60139},
    "nyc_taxi": {"daily": 0.60606, "hourly": 0.87413},
    "machine_temperature_system_failure": {"daily": 0.93333, "hourly": 0.98839},
    "cpu_utilization_asg_misconfiguration": {"daily": 0.63333, "hourly": 0.51250},
}

LUMINOL_AUC = {
    "Twitter_volume_CRM": {"daily": 0.51223, "hourly": 0.62413},
    "Twitter_volume_FB": {"daily": 0.46233, "hourly": 0.32812},
    "Twitter_volume_GOOG": {"daily": 0.57244, "hourly": 0.61250},
    "nyc_taxi": {"daily": 0.68687, "hourly": 0.50233},
    "machine_temperature_system_failure": {"daily": 0.79333, "hourly": 0.88710},
    "cpu_utilization_asg_misconfiguration": {"daily": 0.32917, "hourly": 0.74861},
}

ADTK_AUC = {
    "Twitter_volume_CRM": {"daily": 0.62131, "hourly": 0.58854},
    "Twitter_volume_FB": {"daily": 0.68889, "hourly": 0.48214},
    "Twitter_volume_GOOG": {"daily": 0.68027, "hourly": 0.51250},
    "nyc_taxi": {"daily": 0.64141, "hourly": 0.73958},
    "machine_temperature_system_failure": {"daily": 0.58333, "hourly": 0.52984},
    "cpu_utilization_asg_misconfiguration": {"daily": 0.74167, "hourly": 0.50833},
}

# Forecasting: {dataset: {freq: (MDAPE %, RMSE)}}
AUTOAD_FORECAST = {
    "Twitter_volume_CRM": {"daily": (28.572, 396.090), "hourly": (54.340, 30.922)},
    "Twitter_volume_FB": {"daily": (11.137, 1119.641), "hourly": (35.468, 96.602)},
    "Twitter_volume_GOOG": {"daily": (24.004, 1619.16), "hourly": (27.877, 96.107)},
    "nyc_taxi": {"daily": (5.664, 79176.01), "hourly": (15.728, 8499.727)},
    "machine_temperature_system_failure": {"daily": (4.855, 2134.686), "hourly": (3.735, 96.794)},
    "cpu_utilization_asg_misconfiguration": {"daily": (5.555, 675.602), "hourly": (7.112, 37.017)},
}

PROPHET_FORECAST = {
    "Twitter_volume_CRM": {"daily": (57.659, 550.419), "hourly": (51.689, 45.997)},
    "Twitter_volume_FB": {"daily": (14.287, 1098.187), "hourly": (43.691, 139.053)},
    "Twitter_volume_GOOG": {"daily": (19.830, 1380.836), "hourly": (52.916, 179.444)},
    "nyc_taxi": {"daily": (2.135, 37595.87), "hourly": (27.015, 14614.37)},
    "machine_temperature_system_failure": {"daily": (12.808, 3690.954), "hourly": (8.893, 154.710)},
    "cpu_utilization_asg_misconfiguration": {"daily": (4.717, 574.292), "hourly": (6.562, 55.538)},
}

AUTO_ARIMA_FORECAST = {
    "Twitter_volume_CRM": {"daily": (40.835, 450.688), "hourly": (54.524, 27.677)},
    "Twitter_volume_FB": {"daily": (16.951, 1048.337), "hourly": (40.719, 122.255)},
    "Twitter_volume_GOOG": {"daily": (16.607, 1619.820), "hourly": (40.684, 123.197)},
    "nyc_taxi": {"daily": (5.061, 50913.99), "hourly": (27.403, 12024.55)},
    "machine_temperature_system_failure": {"daily": (8.049, 2079.783), "hourly": (4.362, 98.074)},
    "cpu_utilization_asg_misconfiguration": {"daily": (6.672, 817.155), "hourly": (5.184, 28.292)},
}

# Average seconds per training: {length: {optimization_triggers: seconds}}
AUTOAD_RUNTIME = {
    1000: {0: 2.759, 1: 3.619, 2: 4.962, 3: 7.890},
    2000: {0: 3.881, 1: 4.694, 2: 6.122, 3: 8.118},
    3000: {0: 4.252, 1: 5.620, 2: 7.587, 3: 8.477},
}

COMPETITOR_RUNTIME = {
    "prophet": {1000: 2.015, 2000: 2.189, 3000: 3.251},
    "luminol": {1000: 0.030, 2000: 0.055, 3000: 0.062},
    "adtk": {1000: 0.038, 2000: 0.042, 3000: 0.053},
}

# NAB repository layout for the benchmarked datasets
NAB_DATA_PATHS = {
    "Twitter_volume_CRM": "realTweets/Twitter_volume_CRM.csv",
    "Twitter_volume_FB": "realTweets/Twitter_volume_FB.csv",
    "Twitter_volume_GOOG": "realTweets/Twitter_volume_GOOG.csv",
    "nyc_taxi": "realKnownCause/nyc_taxi.csv",
    "machine_temperature_system_failure": "realKnownCause/machine_temperature_system_failure.csv",
    "cpu_utilization_asg_misconfiguration": "realAWSCloudwatch/cpu_utilization_asg_misconfiguration.csv",
}

NAB_WINDOWS_FILE = "labels/combined_windows.json"
