from .losses import loss_ri, loss_ri_mag, get_loss
from .assignment import Criterion, Assignment, CriterionReport
from .assignment import circular_diff, min_azimuth_gap, azimuth_order, distance_order, speaker_order
from .assignment import pairwise_loss_matrix, pit_assign, lbt_assign, dynamic_select, assign
from .assignment import MAX_PIT_SPEAKERS, SELECTION_THRESHOLD
