from .gcc_phat import SteeringTable, AzimuthEstimateSet
from .gcc_phat import build_steering_table, ratio_mask, gcc_phat_score, estimate_azimuths, azimuth_errors
