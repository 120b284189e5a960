from .BaseModel import BaseModel
from ..criteria import Criterion, dynamic_select, SELECTION_THRESHOLD
from ..localization import build_steering_table
from ..utils import record


class CombinedSeparator(BaseModel):
    '''Inference-time choice between an azimuth-trained and a distance-trained separator.

    The outputs of ``localizer`` are localized with mask-weighted GCC-PHAT; when the smallest estimated azimuth gap
    is larger than ``threshold`` the azimuth-trained model separates the example, otherwise the distance-trained one.

    Parameters
    ----------
    azimuth_model : BaseModel
    distance_model : BaseModel
    threshold : float, default: 20
        Degrees.
    localizer : BaseModel, optional
        Separator whose outputs drive localization. Defaults to ``azimuth_model``; an ``OracleSeparator`` gives
        oracle masks.
    grid_step : float, default: 1.0
        Localization grid in degrees.
    '''
    def __init__(self, azimuth_model, distance_model, threshold=SELECTION_THRESHOLD, localizer=None, grid_step=1.0, verbose=False):
        self.check_params(azimuth_model=azimuth_model, distance_model=distance_model, threshold=threshold,
                          localizer=localizer, grid_step=grid_step, verbose=verbose)
        self._init_logs()
        self._tables = {}


    def check_params(self, **kwargs):
        super().check_params(**kwargs)

        assert self.threshold >= 0, "[E] threshold must be non-negative."


    @property
    def stft_cfg(self):
        return self.azimuth_model.stft_cfg


    def fit(self, examples, criterion=None, **kwargs):
        self.print_msg("Train the azimuth and distance models separately.", type='W')


    def select(self, example):
        '''Criterion chosen for ``example`` and the azimuth estimates behind the choice.

        Single-speaker examples always go to the azimuth model.
        '''
        if example.n_speakers < 2:
            return Criterion.AZIMUTH, None
        localizer = self.azimuth_model if self.localizer is None else self.localizer
        table = self._table(example.scenario.array)
        estimates = localizer.localize(example, table=table)
        return dynamic_select(estimates, self.threshold), estimates


    def separate(self, example):
        criterion, estimates = self.select(example)
        self.last_selection = criterion
        record(df_dict=self.logs, df_name='selections', columns=['example_id', 'criterion', 'estimated_gap'],
               records=[example.example_id, criterion.value, None if estimates is None else estimates.min_gap])
        model = self.azimuth_model if criterion == Criterion.AZIMUTH else self.distance_model
        return model.separate(example)


    def output_order(self, example):
        '''Output order of the model that separated ``example`` last.
        '''
        model = self.distance_model if getattr(self, 'last_selection', None) == Criterion.DISTANCE else self.azimuth_model
        return model.output_order(example)


    def selection_rate(self, criterion=Criterion.AZIMUTH):
        '''Fraction of separated examples routed to ``criterion``.
        '''
        log = self.logs.get('selections')
        if log is None or len(log) == 0:
            return float('nan')
        return float((log['criterion'] == Criterion.parse(criterion).value).mean())


    def _table(self, array):
        key = (array.offsets, self.grid_step)
        if key not in self._tables:
            self._tables[key] = build_steering_table(array, self.grid_step)
        return self._tables[key]
